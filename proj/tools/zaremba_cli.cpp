// Command-line front end: parses flags into a RunConfig and hands off to run().

#include <iostream>

#include "CLI11.hpp"
#include "zaremba/cf_core.hpp"
#include "zaremba/cli.hpp"

using zaremba::Command;
using zaremba::OutputFormat;
using zaremba::RunConfig;

int main(int argc, char** argv) {
  CLI::App app{"Continued fractions with bounded partial quotients: censuses, dimension "
               "brackets and related diagnostics"};
  app.set_version_flag("--version", std::string(zaremba::tool_version()));
  app.require_subcommand(1);

  RunConfig cfg;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* output_opt = nullptr;
  std::vector<CLI::Option*> thread_opts, output_opts;
  std::string output_path;

  std::string format = "json";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--alphabet,-a", cfg.alphabet, "digits, e.g. 1,2,3 or 1-5")->capture_default_str();
    thread_opts.push_back(sub->add_option("--threads,-t", cfg.threads, "worker threads")
                              ->check(CLI::PositiveNumber)->capture_default_str());
    output_opts.push_back(sub->add_option("--output,-o", output_path, "report file (default stdout)"));
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sub->add_option("--seed", cfg.seed, "seed for randomized inputs")->capture_default_str();
  };

  auto* census = app.add_subcommand("census", "enumerate denominators up to N");
  common(census);
  auto* census_n = census->add_option("--n", cfg.n_limit, "bound N (required unless --load)");
  census->add_option("--fit", cfg.fit_limits, "further N values for the multiplicity fit")->delimiter(',');
  census->add_option("--checkpoint", cfg.checkpoint_path, "resumable checkpoint file");
  census->add_option("--save", cfg.save_path, "write the binary census file");
  census->add_option("--load", cfg.load_path, "read a census file instead of enumerating");

  auto* dimension = app.add_subcommand("dimension", "bracket the Hausdorff dimension");
  common(dimension);
  dimension->add_option("--width", cfg.width, "target bracket width")->capture_default_str();
  dimension->add_option("--n-max", cfg.n_max, "largest word length")->capture_default_str();
  dimension->add_option("--depth", cfg.depth, "single word length instead of doubling");

  auto* admissible = app.add_subcommand("admissible", "congruence obstructions up to q_max");
  common(admissible);
  admissible->add_option("--n", cfg.n_limit, "check every d in [1, n]")->capture_default_str();
  admissible->add_option("--d", cfg.values, "explicit values")->delimiter(',');
  admissible->add_option("--q-max", cfg.q_max, "largest modulus")->capture_default_str();
  admissible->add_option("--residues", cfg.residue_q, "list residue counts for q up to this");

  auto* sigma = app.add_subcommand("sigma", "exponential sums over a census histogram");
  common(sigma);
  sigma->add_option("--n", cfg.n_limit, "bound N")->capture_default_str();
  sigma->add_option("--q1", cfg.q1, "scale Q1")->capture_default_str();
  sigma->add_option("--frequencies", cfg.frequencies, "|Z| including 0")->capture_default_str();
  sigma->add_option("--c", cfg.c, "exponent of the bound diagnostic")->capture_default_str();

  auto* ensemble = app.add_subcommand("ensemble", "fixed-length ensembles and prefix cuts");
  common(ensemble);
  ensemble->add_option("--lengths", cfg.lengths, "factor lengths")->delimiter(',')->capture_default_str();
  ensemble->add_option("--n", cfg.n_limit, "bound N for the prefix cut")->capture_default_str();
  ensemble->add_option("--m1", cfg.m1, "prefix cut threshold M1");
  ensemble->add_option("--m2", cfg.m2)->capture_default_str();
  ensemble->add_option("--m4", cfg.m4)->capture_default_str();
  ensemble->add_option("--epsilon0", cfg.epsilon0)->capture_default_str();
  ensemble->add_option("--delta", cfg.delta, "dimension estimate (computed when absent)");

  auto* rq = app.add_subcommand("rq", "congruence pair count, two ways");
  common(rq);
  rq->add_option("--size", cfg.size, "number of random vectors")->capture_default_str();
  rq->add_option("--q", cfg.q, "modulus")->capture_default_str();
  rq->add_option("--max-entry", cfg.max_entry, "largest vector entry")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return zaremba::kExitDomain;
  }

  const std::pair<CLI::App*, Command> commands[] = {
      {census, Command::census}, {dimension, Command::dimension}, {admissible, Command::admissible},
      {sigma, Command::sigma},   {ensemble, Command::ensemble},   {rq, Command::rq}};
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    if (commands[i].first->parsed()) {
      cfg.command = commands[i].second;
      threads_opt = thread_opts[i];
      output_opt = output_opts[i];
    }
  }
  // the alphabet default depends on the subcommand
  static const char* defaults[] = {"1,2,3,4,5", "1,2", "1,2", "1,2,3,4", "1,2,3,4", "1,2"};
  auto* active = commands[static_cast<int>(cfg.command)].first;
  if (active->get_option("--alphabet")->count() == 0) cfg.alphabet = defaults[static_cast<int>(cfg.command)];
  if (output_opt->count() > 0) cfg.output_path = output_path;
  cfg.output_format = format == "csv" ? OutputFormat::csv : OutputFormat::json;

  if (census->parsed() && census_n->count() == 0 && !cfg.load_path) {
    std::cerr << "error: census needs --n or --load\n";
    return zaremba::kExitDomain;
  }

  try {
    zaremba::apply_environment(cfg, threads_opt->count() > 0, output_opt->count() > 0);
    zaremba::Alphabet::parse(cfg.alphabet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return zaremba::kExitDomain;
  }
  return zaremba::run(cfg, std::cout, std::cerr);
}
