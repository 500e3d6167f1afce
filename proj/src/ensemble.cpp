#include "zaremba/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "zaremba/errors.hpp"

namespace zaremba {

namespace {

constexpr std::uint64_t kMaxProduct = 10'000'000;
// bitset budget of the fast independence check, in bits
constexpr std::uint64_t kMaxBits = std::uint64_t{1} << 31;

nlohmann::json norm_json(UInt128 v) {
  if (v <= std::numeric_limits<std::uint64_t>::max()) return static_cast<std::uint64_t>(v);
  return to_string(v);
}

nlohmann::json bound_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace

bool NormWindow::contains(UInt128 norm) const {
  auto x = static_cast<long double>(norm);
  return x >= static_cast<long double>(lo) && x <= static_cast<long double>(hi);
}

UInt128 FactoredEnsemble::product_size() const {
  UInt128 p = 1;
  for (const auto& f : factors) p = checked_mul(p, f.size());
  return p;
}

void EnsembleParams::validate() const {
  if (!(epsilon0 > 0.0 && epsilon0 < 0.0004)) throw DomainError("epsilon0 must lie in (0, 0.0004)");
  if (!(m1 >= 1.0 && m2 >= 1.0 && m4 >= 1.0)) throw DomainError("m1, m2, m4 must be >= 1");
  if (!(c_g1 > 0 && c_rest > 0 && c_g2 > 0 && c_hi > 0 && k_g1 > 0)) {
    throw DomainError("window constants must be positive");
  }
}

NormWindow EnsembleParams::g1_window(const Alphabet& a) const {
  double aa = static_cast<double>(a.max_digit()) * a.max_digit();
  return {m1 / (c_g1 * aa), k_g1 * std::pow(m1, 1.0 + 2.0 * epsilon0)};
}

NormWindow EnsembleParams::rest_window(const Alphabet& a, double n_limit) const {
  double aa = static_cast<double>(a.max_digit()) * a.max_digit();
  return {n_limit / (c_rest * aa * std::pow(m1, 1.0 + 2.0 * epsilon0)), c_hi * aa * n_limit / m1};
}

NormWindow EnsembleParams::g2_window(const Alphabet& a) const {
  double aa = static_cast<double>(a.max_digit()) * a.max_digit();
  return {m2 / (c_g2 * aa * std::pow(m1, 2.0 * epsilon0)),
          c_hi * aa * m2 * std::pow(m1 * m2, 2.0 * epsilon0)};
}

NormWindow EnsembleParams::g4_window(const Alphabet& a) const {
  double aa = static_cast<double>(a.max_digit()) * a.max_digit();
  return {std::pow(m4, 1.0 - epsilon0) / (c_g2 * aa), c_hi * aa * m4};
}

FactoredEnsemble build_fixed_length_ensemble(const Alphabet& alphabet,
                                             const std::vector<std::size_t>& lengths) {
  if (lengths.empty()) throw DomainError("at least one factor length is required");
  FactoredEnsemble e{alphabet, {}, std::nullopt};
  for (std::size_t n : lengths) {
    if (n == 0) throw DomainError("factor lengths must be positive");
    if (std::pow(static_cast<double>(alphabet.size()), static_cast<double>(n)) > kMaxProduct) {
      throw ResourceError("factor of length " + std::to_string(n) + " exceeds 10^7 words");
    }
    WordSet words{Word{}};
    for (std::size_t i = 0; i < n; ++i) {
      WordSet next;
      next.reserve(words.size() * alphabet.size());
      for (const Word& w : words)
        for (Digit d : alphabet.digits()) next.push_back(w.concat(Word{d}));
      words = std::move(next);
    }
    e.factors.push_back(std::move(words));
  }
  return e;
}

PrefixSplit split_by_norm(const Alphabet& alphabet, std::uint64_t n_limit, std::uint64_t m1) {
  if (m1 <= 1) throw DomainError("split_by_norm needs m1 > 1");
  if (m1 >= n_limit) throw DomainError("split_by_norm needs m1 < N");
  PrefixSplit out;
  // DFS carrying the last two continuants of the prefix
  struct Frame {
    std::vector<Digit> digits;
    UInt128 prev, cur;
  };
  std::vector<Frame> stack{{{}, 0, 1}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    for (auto it = alphabet.digits().rbegin(); it != alphabet.digits().rend(); ++it) {
      UInt128 next = checked_add(checked_mul(*it, f.cur), f.prev);
      std::vector<Digit> digits = f.digits;
      digits.push_back(*it);
      if (next >= m1) {
        out.prefixes.emplace_back(std::move(digits));
      } else {
        stack.push_back({std::move(digits), f.cur, next});
      }
    }
  }
  std::sort(out.prefixes.begin(), out.prefixes.end());
  auto& r = out.report;
  r.size = out.prefixes.size();
  r.min_norm = std::numeric_limits<UInt128>::max();
  for (const Word& w : out.prefixes) {
    UInt128 k = continuant(w);
    r.min_norm = std::min(r.min_norm, k);
    r.max_norm = std::max(r.max_norm, k);
    if (w.size() % 2 == 1) ++r.odd_length;
  }
  const UInt128 a = alphabet.max_digit();
  r.within_doubling_bound = r.max_norm <= 2 * a * m1;
  r.within_growth_bound = r.max_norm <= (a + 1) * m1;
  return out;
}

namespace {

// Index of a word among words of its length: base-|A| number of digit ranks.
class WordIndexer {
 public:
  explicit WordIndexer(const Alphabet& a) : base_(a.size()) {
    for (std::size_t i = 0; i < a.size(); ++i) rank_[a.digits()[i]] = i;
  }
  std::uint64_t rank(Digit d) const { return rank_.at(d); }
  std::uint64_t base() const { return base_; }

 private:
  std::uint64_t base_;
  std::map<Digit, std::uint64_t> rank_;
};

struct FactorCode {
  std::size_t length;
  std::uint64_t index;
};

std::uint64_t int_pow(std::uint64_t b, std::size_t e) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (b != 0 && r > kMaxBits / b) return kMaxBits + 1;
    r *= b;
  }
  return r;
}

}  // namespace

IndependenceReport check_independence(const FactoredEnsemble& e, unsigned threads) {
  if (threads == 0) throw DomainError("threads must be >= 1");
  IndependenceReport rep;
  rep.product_size = e.product_size();
  if (rep.product_size > kMaxProduct) {
    throw ResourceError("product of " + to_string(rep.product_size) + " tuples exceeds 10^7");
  }
  for (const auto& f : e.factors)
    for (const Word& w : f)
      if (!w.is_over(e.alphabet)) throw DomainError("factor word " + w.to_string() + " is off the alphabet");
  const auto total = static_cast<std::uint64_t>(rep.product_size);
  if (total == 0 || e.factors.empty()) {
    rep.independent = true;
    return rep;
  }

  // total lengths reachable by concatenation
  std::set<std::size_t> lengths{0};
  for (const auto& f : e.factors) {
    std::set<std::size_t> next;
    for (std::size_t l : lengths)
      for (const Word& w : f) next.insert(l + w.size());
    lengths = std::move(next);
  }
  WordIndexer idx(e.alphabet);
  std::map<std::size_t, std::uint64_t> offset;
  std::uint64_t bits = 0;
  bool fast = true;
  for (std::size_t l : lengths) {
    std::uint64_t span = int_pow(idx.base(), l);
    if (span > kMaxBits || bits + span > kMaxBits) {
      fast = false;
      break;
    }
    offset[l] = bits;
    bits += span;
  }

  if (fast) {
    std::vector<std::vector<FactorCode>> codes(e.factors.size());
    for (std::size_t i = 0; i < e.factors.size(); ++i)
      for (const Word& w : e.factors[i]) {
        std::uint64_t v = 0;
        for (Digit d : w.digits()) v = v * idx.base() + idx.rank(d);
        codes[i].push_back({w.size(), v});
      }
    std::vector<std::atomic<std::uint64_t>> seen((bits + 63) / 64);
    std::atomic<std::uint64_t> collisions{0};
    std::atomic<std::size_t> next_first{0};
    auto work = [&] {
      std::vector<std::size_t> pos(codes.size());
      std::uint64_t local = 0;
      for (std::size_t first = next_first.fetch_add(1); first < codes[0].size();
           first = next_first.fetch_add(1)) {
        std::fill(pos.begin(), pos.end(), 0);
        pos[0] = first;
        while (true) {
          std::size_t len = 0;
          std::uint64_t v = 0;
          for (std::size_t i = 0; i < codes.size(); ++i) {
            const auto& c = codes[i][pos[i]];
            v = v * int_pow(idx.base(), c.length) + c.index;
            len += c.length;
          }
          std::uint64_t bit = offset.at(len) + v;
          std::uint64_t mask = std::uint64_t{1} << (bit % 64);
          if (seen[bit / 64].fetch_or(mask, std::memory_order_relaxed) & mask) ++local;
          // odometer over factors 1..k-1
          bool done = true;
          for (std::size_t i = codes.size(); i-- > 1;) {
            if (++pos[i] < codes[i].size()) {
              done = false;
              break;
            }
            pos[i] = 0;
          }
          if (done) break;
        }
      }
      collisions += local;
    };
    if (threads == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    rep.distinct = total - collisions.load();
  } else {
    std::vector<std::vector<Digit>> all;
    all.reserve(total);
    std::vector<std::size_t> pos(e.factors.size(), 0);
    for (std::uint64_t n = 0; n < total; ++n) {
      std::vector<Digit> w;
      for (std::size_t i = 0; i < pos.size(); ++i) {
        auto d = e.factors[i][pos[i]].digits();
        w.insert(w.end(), d.begin(), d.end());
      }
      all.push_back(std::move(w));
      for (std::size_t i = pos.size(); i-- > 0;) {
        if (++pos[i] < e.factors[i].size()) break;
        pos[i] = 0;
      }
    }
    std::sort(all.begin(), all.end());
    rep.distinct = static_cast<std::uint64_t>(std::unique(all.begin(), all.end()) - all.begin());
  }
  rep.independent = rep.distinct == total;
  return rep;
}

bool verify_independence(const FactoredEnsemble& ensemble, unsigned threads) {
  return check_independence(ensemble, threads).independent;
}

std::vector<FactorWindowReport> verify_norm_windows(const FactoredEnsemble& e) {
  if (!e.norm_windows || e.norm_windows->size() != e.factors.size()) {
    throw DomainError("one norm window per factor is required");
  }
  std::vector<FactorWindowReport> out;
  for (std::size_t i = 0; i < e.factors.size(); ++i) {
    FactorWindowReport r;
    r.index = i;
    r.size = e.factors[i].size();
    r.window = (*e.norm_windows)[i];
    if (!e.factors[i].empty()) {
      r.min_norm = std::numeric_limits<UInt128>::max();
      for (const Word& w : e.factors[i]) {
        UInt128 k = continuant(w);
        r.min_norm = std::min(r.min_norm, k);
        r.max_norm = std::max(r.max_norm, k);
      }
      r.pass = r.window.contains(r.min_norm) && r.window.contains(r.max_norm);
    }
    out.push_back(r);
  }
  return out;
}

std::vector<CardinalityRow> factor_cardinality_check(const FactoredEnsemble& e, double delta_hat) {
  std::vector<CardinalityRow> out;
  for (std::size_t i = 0; i < e.factors.size(); ++i) {
    CardinalityRow r;
    r.index = i;
    r.size = e.factors[i].size();
    r.target = 2.0 * delta_hat;
    for (const Word& w : e.factors[i]) r.max_norm = std::max(r.max_norm, continuant(w));
    if (r.size > 1 && r.max_norm > 1) {
      r.exponent = std::log(static_cast<double>(r.size)) / std::log(static_cast<double>(r.max_norm));
    }
    out.push_back(r);
  }
  return out;
}

nlohmann::json to_json(const PrefixReport& r) {
  return {{"size", r.size},
          {"min_norm", norm_json(r.min_norm)},
          {"max_norm", norm_json(r.max_norm)},
          {"max_le_2_A_m1", r.within_doubling_bound},
          {"max_le_A_plus_1_m1", r.within_growth_bound},
          {"odd_length_prefixes", r.odd_length}};
}

nlohmann::json to_json(const IndependenceReport& r) {
  return {{"independent", r.independent},
          {"product_size", norm_json(r.product_size)},
          {"distinct_concatenations", r.distinct}};
}

nlohmann::json to_json(const std::vector<FactorWindowReport>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"factor", r.index},
                   {"size", r.size},
                   {"min_norm", norm_json(r.min_norm)},
                   {"max_norm", norm_json(r.max_norm)},
                   {"window", {bound_json(r.window.lo), bound_json(r.window.hi)}},
                   {"pass", r.pass}});
  }
  return out;
}

nlohmann::json to_json(const std::vector<CardinalityRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"factor", r.index},
                   {"size", r.size},
                   {"max_norm", norm_json(r.max_norm)},
                   {"exponent", r.exponent},
                   {"two_delta_hat", r.target}});
  }
  return out;
}

}  // namespace zaremba
