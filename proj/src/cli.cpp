#include "zaremba/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "zaremba/census.hpp"
#include "zaremba/congruence.hpp"
#include "zaremba/dimension.hpp"
#include "zaremba/ensemble.hpp"
#include "zaremba/errors.hpp"
#include "zaremba/freq.hpp"
#include "zaremba/modular.hpp"

namespace zaremba {

using nlohmann::json;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::census: return "census";
    case Command::dimension: return "dimension";
    case Command::admissible: return "admissible";
    case Command::sigma: return "sigma";
    case Command::ensemble: return "ensemble";
    case Command::rq: return "rq";
  }
  return "?";
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

std::string_view tool_version() { return "1.0.0"; }

json RunConfig::to_json() const {
  json j{{"command", to_string(command)},
         {"alphabet", Alphabet::parse(alphabet).to_string()},
         {"threads", threads},
         {"output_format", to_string(output_format)},
         {"seed", seed}};
  switch (command) {
    case Command::census:
      j["n"] = n_limit;
      j["fit"] = fit_limits;
      if (load_path) j["load"] = *load_path;
      break;
    case Command::dimension:
      j["width"] = width;
      j["n_max"] = n_max;
      if (depth) j["depth"] = *depth;
      break;
    case Command::admissible:
      j["n"] = n_limit;
      j["values"] = values;
      j["q_max"] = q_max;
      j["residue_q"] = residue_q;
      break;
    case Command::sigma:
      j["n"] = n_limit;
      j["q1"] = q1;
      j["frequencies"] = frequencies;
      j["c"] = c;
      break;
    case Command::ensemble:
      j["n"] = n_limit;
      j["lengths"] = lengths;
      j["epsilon0"] = epsilon0;
      j["m1"] = m1 ? json(*m1) : json(nullptr);
      j["m2"] = m2;
      j["m4"] = m4;
      j["delta"] = delta ? json(*delta) : json(nullptr);
      break;
    case Command::rq:
      j["size"] = size;
      j["q"] = q;
      j["max_entry"] = max_entry;
      break;
  }
  return j;
}

void apply_environment(RunConfig& config, bool threads_given, bool output_given) {
  if (!threads_given) {
    if (const char* t = std::getenv("ZAREMBA_THREADS"); t && *t) {
      char* end = nullptr;
      unsigned long v = std::strtoul(t, &end, 10);
      if (*end != '\0' || v == 0) throw DomainError("ZAREMBA_THREADS must be a positive integer");
      config.threads = static_cast<unsigned>(v);
    }
  }
  if (!output_given) {
    if (const char* o = std::getenv("ZAREMBA_OUTPUT"); o && *o) config.output_path = o;
  }
}

namespace {

struct Report {
  json result;
  std::string csv;      // body when the format is csv
  std::string summary;  // human-readable lines
};

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

Report run_census(const RunConfig& cfg, std::ostream& err) {
  const Alphabet a = Alphabet::parse(cfg.alphabet);
  auto progress = [&err](std::size_t done, std::size_t total) {
    if (total == 0) return;
    if (done == total || done % std::max<std::size_t>(1, total / 10) == 0) {
      err << "census: " << done << "/" << total << " subtrees\n";
    }
  };
  auto census_at = [&](std::uint64_t n) {
    CensusConfig c{a, n, cfg.threads, std::nullopt, std::nullopt};
    if (n == cfg.n_limit && cfg.checkpoint_path) c.checkpoint_path = *cfg.checkpoint_path;
    return enumerate_denominators(c, progress);
  };

  CensusResult main = cfg.load_path ? load_census(*cfg.load_path) : census_at(cfg.n_limit);
  if (cfg.save_path) save_census(main, *cfg.save_path);

  Report r;
  auto missing = main.missing();
  const std::size_t shown = std::min<std::size_t>(missing.size(), 1000);
  r.result = {{"n", main.n_limit()},
              {"cardinality", main.cardinality()},
              {"proportion", proportion(main)},
              {"word_count", main.word_count()},
              {"missing_count", missing.size()},
              {"missing", std::vector<std::uint64_t>(missing.begin(), missing.begin() + shown)},
              {"missing_truncated", shown < missing.size()},
              {"window", {main.window().lo, main.window().hi}},
              {"mean_window_multiplicity", mean_upper_half_multiplicity(main)}};
  if (!cfg.fit_limits.empty()) {
    std::vector<CensusResult> runs;
    for (std::uint64_t n : cfg.fit_limits)
      if (n != main.n_limit()) runs.push_back(census_at(n));
    runs.push_back(std::move(main));
    auto fit = multiplicity_exponent(runs);
    json pts = json::array();
    for (std::size_t i = 0; i < fit.points.size(); ++i) {
      pts.push_back({{"n", fit.points[i].n_limit},
                     {"mean_multiplicity", fit.points[i].mean_multiplicity},
                     {"log_residual", fit.residuals[i]}});
    }
    r.result["multiplicity_fit"] = {{"slope", fit.slope},
                                    {"intercept", fit.intercept},
                                    {"rms_residual", fit.rms_residual},
                                    {"points", pts}};
    r.summary += "multiplicity exponent " + fixed(fit.slope, 4) + "\n";
    std::ostringstream csv;
    write_histogram_csv(runs.back(), csv);
    r.csv = csv.str();
    main = std::move(runs.back());
  } else {
    std::ostringstream csv;
    write_histogram_csv(main, csv);
    r.csv = csv.str();
  }
  r.summary = "|D(" + std::to_string(main.n_limit()) + ")| = " + std::to_string(main.cardinality()) +
              " of " + std::to_string(main.n_limit()) + " (proportion " + fixed(proportion(main), 6) +
              ", " + std::to_string(missing.size()) + " missing)\n" + r.summary;
  return r;
}

json bracket_json(const PressureBracket& b) {
  return {{"n", b.n},
          {"s_lower", b.s_lower},
          {"s_upper", b.s_upper},
          {"width", b.width()},
          {"midpoint", b.midpoint()},
          {"coarse", {b.coarse_lower, b.coarse_upper}},
          {"refined", {b.refined_lower, b.refined_upper}},
          {"refine_depth", b.refine_depth},
          {"clamped", b.clamped},
          {"converged", b.converged}};
}

Report run_dimension(const RunConfig& cfg, std::ostream& err) {
  const Alphabet a = Alphabet::parse(cfg.alphabet);
  BracketOptions opts;
  opts.threads = cfg.threads;
  std::vector<PressureBracket> history;
  PressureBracket b;
  if (cfg.depth) {
    b = dimension_bracket(a, *cfg.depth, opts);
    history.push_back(b);
  } else {
    if (!(cfg.width > 0.0)) throw DomainError("width must be positive");
    b = estimate_dimension(a, cfg.width, cfg.n_max, opts, &history);
  }
  for (const auto& h : history) {
    err << "dimension: n=" << h.n << " [" << fixed(h.s_lower, 7) << ", " << fixed(h.s_upper, 7)
        << "] " << fixed(h.wall_seconds, 2) << "s\n";
  }
  Report r;
  json hist = json::array();
  for (const auto& h : history) hist.push_back(bracket_json(h));
  r.result = {{"bracket", bracket_json(b)}, {"history", hist}};
  // wall time is left out of the csv so reports stay reproducible
  std::ostringstream csv;
  csv << "n,s_lower,s_upper,width\n" << std::setprecision(12);
  for (const auto& h : history) csv << h.n << ',' << h.s_lower << ',' << h.s_upper << ',' << h.width() << '\n';
  r.csv = csv.str();
  r.summary = "dimension of " + a.to_string() + " in [" + fixed(b.s_lower, 7) + ", " + fixed(b.s_upper, 7) +
              "] (n = " + std::to_string(b.n) + ", width " + fixed(b.width(), 7) + ")\n";
  return r;
}

Report run_admissible(const RunConfig& cfg) {
  const Alphabet a = Alphabet::parse(cfg.alphabet);
  std::vector<std::uint64_t> ds = cfg.values;
  if (ds.empty()) {
    ds.resize(cfg.n_limit);
    std::iota(ds.begin(), ds.end(), std::uint64_t{1});
  }
  if (cfg.q_max < 2) throw DomainError("q_max must be >= 2");
  Report r;
  json obstructions = json::array();
  std::uint64_t admissible = 0;
  for (std::uint64_t d : ds) {
    if (auto q = first_obstruction(d, a, cfg.q_max)) {
      obstructions.push_back({{"d", d}, {"q", *q}});
    } else {
      ++admissible;
    }
  }
  r.result = {{"checked", ds.size()}, {"admissible", admissible}, {"obstructions", obstructions}};
  if (cfg.residue_q >= 1) {
    json counts = json::array();
    for (std::uint32_t q = 1; q <= cfg.residue_q; ++q) {
      counts.push_back({{"q", q}, {"residue_count", residues_mod_q(a, q).size()}});
    }
    r.result["residue_counts"] = counts;
  }
  std::ostringstream csv;
  write_admissibility_csv(ds, a, cfg.q_max, csv);
  r.csv = csv.str();
  r.summary = std::to_string(admissible) + " of " + std::to_string(ds.size()) +
              " values pass every congruence test up to q = " + std::to_string(cfg.q_max) + "\n";
  return r;
}

Report run_sigma(const RunConfig& cfg, std::ostream& err) {
  const Alphabet a = Alphabet::parse(cfg.alphabet);
  const ScaleSequence scale(cfg.q1);
  if (cfg.frequencies == 0) throw DomainError("at least one frequency is required");
  auto census = enumerate_denominators(CensusConfig{a, cfg.n_limit, cfg.threads, std::nullopt, std::nullopt});
  auto r_d = multiplicities_of(census);
  if (r_d.empty()) throw DomainError("the census window holds no denominators");
  double omega = 0;
  for (const auto& [d, k] : r_d) omega += static_cast<double>(k);

  // Z = {0} plus seeded uniform frequencies
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> z{0.0};
  while (z.size() < cfg.frequencies) z.push_back(u(rng));
  err << "sigma: " << z.size() << " frequencies against " << r_d.size() << " denominators\n";

  double sigma = sigma_nz(z, r_d, cfg.threads);
  double at_zero = sigma_nz(std::span<const double>(z).first(1), r_d, 1);
  auto table = cell_table(z, cfg.n_limit, scale, r_d);
  json cells = json::array();
  for (const auto& row : table) {
    double ratio = row.sigma_part > 0
                       ? bound_diagnostic(row.sigma_part, omega, static_cast<double>(row.count), row.cell, cfg.c, scale)
                       : 0.0;
    cells.push_back({{"alpha", row.cell.alpha},
                     {"beta", row.cell.beta},
                     {"count", row.count},
                     {"sigma_part", row.sigma_part},
                     {"bound_ratio", ratio}});
  }
  Report r;
  r.result = {{"omega_size", omega},
              {"z_size", z.size()},
              {"sigma", sigma},
              {"sigma_at_zero", at_zero},
              {"triangle_bound_holds", sigma <= static_cast<double>(z.size()) * omega * (1 + 1e-12)},
              {"cells", cells}};
  std::ostringstream csv;
  write_cell_csv(table, csv);
  r.csv = csv.str();
  r.summary = "sigma = " + fixed(sigma, 3) + " over |Z| = " + std::to_string(z.size()) +
              ", |Omega| = " + fixed(omega, 0) + "\n";
  return r;
}

Report run_ensemble(const RunConfig& cfg) {
  const Alphabet a = Alphabet::parse(cfg.alphabet);
  EnsembleParams params;
  params.epsilon0 = cfg.epsilon0;
  params.m1 = cfg.m1 ? static_cast<double>(*cfg.m1) : 1.0;
  params.m2 = cfg.m2;
  params.m4 = cfg.m4;
  params.validate();

  auto e = build_fixed_length_ensemble(a, cfg.lengths);
  // windows g1, g2, g4 for the leading factors when M1 is set, [1, inf) otherwise
  std::vector<NormWindow> windows(e.factors.size());
  if (cfg.m1) {
    const NormWindow w[] = {params.g1_window(a), params.g2_window(a), params.g4_window(a)};
    for (std::size_t i = 0; i < windows.size() && i < 3; ++i) windows[i] = w[i];
  }
  e.norm_windows = windows;

  double delta = 0.0;
  if (cfg.delta) {
    delta = *cfg.delta;
  } else {
    BracketOptions opts;
    opts.threads = cfg.threads;
    delta = dimension_bracket(a, 8, opts).midpoint();
  }
  auto independence = check_independence(e, cfg.threads);
  auto window_rows = verify_norm_windows(e);
  auto cardinality = factor_cardinality_check(e, delta);

  Report r;
  r.result = {{"independence", to_json(independence)},
              {"norm_windows", to_json(window_rows)},
              {"cardinality", to_json(cardinality)},
              {"delta_hat", delta}};
  if (cfg.m1) {
    auto split = split_by_norm(a, cfg.n_limit, *cfg.m1);
    r.result["prefix_split"] = to_json(split.report);
    r.result["rest_window"] = {params.rest_window(a, static_cast<double>(cfg.n_limit)).lo,
                               params.rest_window(a, static_cast<double>(cfg.n_limit)).hi};
  }
  std::ostringstream csv;
  csv << "factor,size,min_norm,max_norm,window_pass,exponent\n" << std::setprecision(12);
  for (std::size_t i = 0; i < window_rows.size(); ++i) {
    csv << i << ',' << window_rows[i].size << ',' << to_string(window_rows[i].min_norm) << ','
        << to_string(window_rows[i].max_norm) << ',' << (window_rows[i].pass ? 1 : 0) << ','
        << cardinality[i].exponent << '\n';
  }
  r.csv = csv.str();
  r.summary = std::string(independence.independent ? "independent" : "dependent") + ": " +
              std::to_string(independence.distinct) + " distinct of " + to_string(independence.product_size) +
              " concatenations\n";
  return r;
}

Report run_rq(const RunConfig& cfg) {
  if (cfg.q == 0) throw DomainError("q must be >= 1");
  auto xi = VectorSet::random(cfg.size, cfg.max_entry, cfg.seed);
  auto direct = rq_direct(xi, cfg.q);
  auto charsum = rq_charsum(xi, cfg.q);
  if (direct != charsum) {
    throw ConsistencyError("direct count " + std::to_string(direct) + " differs from character sum " +
                           std::to_string(charsum));
  }
  Report r;
  json vecs = json::array();
  for (const auto& v : xi.vectors()) vecs.push_back({v.u, v.big_u});
  r.result = {{"direct", direct}, {"charsum", charsum}, {"agree", true}, {"vectors", vecs}};
  r.csv = "q,size,direct,charsum\n" + std::to_string(cfg.q) + ',' + std::to_string(cfg.size) + ',' +
          std::to_string(direct) + ',' + std::to_string(charsum) + '\n';
  r.summary = "R_" + std::to_string(cfg.q) + " = " + std::to_string(direct) + " (direct == charsum)\n";
  return r;
}

Report dispatch(const RunConfig& cfg, std::ostream& err) {
  if (cfg.threads == 0) throw DomainError("threads must be >= 1");
  switch (cfg.command) {
    case Command::census: return run_census(cfg, err);
    case Command::dimension: return run_dimension(cfg, err);
    case Command::admissible: return run_admissible(cfg);
    case Command::sigma: return run_sigma(cfg, err);
    case Command::ensemble: return run_ensemble(cfg);
    case Command::rq: return run_rq(cfg);
  }
  throw DomainError("unknown command");
}

void emit(const RunConfig& cfg, const Report& rep, std::ostream& out) {
  if (cfg.output_format == OutputFormat::json) {
    json doc{{"tool", "zaremba"},
             {"version", tool_version()},
             {"schema", 1},
             {"config", cfg.to_json()},
             {"result", rep.result}};
    out << doc.dump(2) << '\n';
  } else {
    out << "# zaremba " << tool_version() << '\n' << "# config " << cfg.to_json().dump() << '\n' << rep.csv;
  }
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Report rep = dispatch(config, err);
    if (config.output_path) {
      std::ofstream file(*config.output_path, std::ios::binary);
      if (!file) throw ResourceError("cannot open " + *config.output_path + " for writing");
      emit(config, rep, file);
      if (!file.flush()) throw ResourceError("failed writing " + *config.output_path);
      out << rep.summary;
    } else {
      emit(config, rep, out);
      err << rep.summary;
    }
    return kExitOk;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << '\n';
    return kExitResource;
  } catch (const CensusFileError& e) {
    err << "census file error: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::bad_alloc&) {
    err << "resource error: out of memory\n";
    return kExitResource;
  } catch (const ConsistencyError& e) {
    err << "internal consistency error: " << e.what() << '\n';
    return kExitConsistency;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitConsistency;
  }
}

}  // namespace zaremba
