#include "zaremba/dimension.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <thread>

#include "zaremba/errors.hpp"

namespace zaremba {

namespace {

// Kahan-Babuska accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void partition_dfs(std::span<const Digit> digits, unsigned remaining, double cur, double prev,
                   double exponent, CompensatedSum& acc) {
  if (remaining == 0) {
    acc.add(std::pow(cur, exponent));
    return;
  }
  for (Digit a : digits) partition_dfs(digits, remaining - 1, a * cur + prev, cur, exponent, acc);
}

std::uint64_t word_count(const Alphabet& alphabet, unsigned n, std::uint64_t cap) {
  std::uint64_t count = 1;
  for (unsigned i = 0; i < n; ++i) {
    if (count > cap / alphabet.size()) return cap + 1;
    count *= alphabet.size();
  }
  return count;
}

// ---------------------------------------------------------------------------
// Coarse bracket: continuants of all length-n words binned by log <w>.

constexpr double kLogBin = 1.0 / 65536.0;

class ContinuantProfile {
 public:
  ContinuantProfile(const Alphabet& alphabet, unsigned n, unsigned threads) {
    double qmax = static_cast<double>(continuant(std::vector<Digit>(n, alphabet.max_digit())));
    counts_.assign(static_cast<std::size_t>(std::log(qmax) / kLogBin) + 4, 0);

    // top-level subtrees, enough of them to keep every thread busy
    struct Task {
      unsigned depth;
      double cur, prev;
    };
    std::vector<Task> tasks{{0, 1.0, 0.0}};
    while (tasks.size() < 8 * static_cast<std::size_t>(threads) && tasks.front().depth < n) {
      std::vector<Task> next;
      for (const Task& t : tasks)
        for (Digit a : alphabet.digits()) next.push_back({t.depth + 1, a * t.cur + t.prev, t.cur});
      tasks = std::move(next);
    }

    std::vector<std::vector<std::uint64_t>> shards(threads, std::vector<std::uint64_t>(counts_.size(), 0));
    std::atomic<std::size_t> next{0};
    auto work = [&](unsigned id) {
      auto& bins = shards[id];
      for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
        walk(alphabet.digits(), n - tasks[i].depth, tasks[i].cur, tasks[i].prev, bins);
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }
    for (const auto& s : shards)
      for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += s[i];
  }

  // Outward bounds on Z_n(s): bin i holds <w> with log <w> in
  // [(i-1) h, (i+2) h], one bin of slack on each side for rounding in log.
  double upper(double s) const { return sum(s, -1.0); }
  double lower(double s) const { return sum(s, 2.0); }

 private:
  static void walk(std::span<const Digit> digits, unsigned remaining, double cur, double prev,
                   std::vector<std::uint64_t>& bins) {
    if (remaining == 0) {
      ++bins[static_cast<std::size_t>(std::log(cur) / kLogBin)];
      return;
    }
    if (remaining == 1) {
      for (Digit a : digits) ++bins[static_cast<std::size_t>(std::log(a * cur + prev) / kLogBin)];
      return;
    }
    for (Digit a : digits) walk(digits, remaining - 1, a * cur + prev, cur, bins);
  }

  double sum(double s, double shift) const {
    CompensatedSum acc;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] == 0) continue;
      double log_q = (static_cast<double>(i) + shift) * kLogBin;
      acc.add(static_cast<double>(counts_[i]) * std::exp(-2.0 * s * log_q));
    }
    return acc.value();
  }

  std::vector<std::uint64_t> counts_;
};

// ---------------------------------------------------------------------------
// Refined bracket.

constexpr unsigned kTaylorTerms = 48;

class TransferRatio {
 public:
  TransferRatio(const Alphabet& alphabet, unsigned depth, unsigned cells)
      : digits_(alphabet.digits().begin(), alphabet.digits().end()),
        depth_(depth),
        lo_(1.0 / (alphabet.max_digit() + 1.0)),
        hi_(1.0 / alphabet.min_digit()),
        center_(0.5 * (lo_ + hi_)),
        cells_(cells) {
    for (unsigned i = 0; i <= cells_; ++i) {
      double x = i == cells_ ? hi_ : lo_ + (hi_ - lo_) * i / cells_;
      grid_.push_back(x);
    }
  }

  // (lambda(s), Lambda(s)): the best lower and upper ratio bounds over
  // all depths 1..depth.
  std::pair<double, double> bounds(double s) {
    accumulate(s);
    const double t = 2.0 * s;
    std::vector<double> binom(kTaylorTerms + 1);
    binom[0] = 1.0;
    for (unsigned j = 1; j <= kTaylorTerms; ++j) binom[j] = binom[j - 1] * (-t - (j - 1)) / j;

    // weights (a + x)^{-2s} at every grid point
    const std::size_t na = digits_.size();
    std::vector<double> weight(grid_.size() * na);
    for (std::size_t i = 0; i < grid_.size(); ++i)
      for (std::size_t a = 0; a < na; ++a) weight[i * na + a] = std::pow(digits_[a] + grid_[i], -t);

    double best_lower = 0.0;
    double best_upper = std::numeric_limits<double>::infinity();
    std::vector<double> f_lo(grid_.size()), f_hi(grid_.size());
    std::vector<double> g_lo(grid_.size() * na), g_hi(grid_.size() * na);
    for (unsigned k = 0; k < depth_; ++k) {
      const auto& m = moments_[k];
      const double err = tail_bound(t, k);
      auto eval = [&](double x) {
        double y = x - center_;
        double acc = 0.0;
        for (unsigned j = kTaylorTerms + 1; j-- > 0;) acc = acc * y + binom[j] * m[j];
        return acc;
      };
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        double v = eval(grid_[i]);
        f_lo[i] = v - err;
        f_hi[i] = v + err;
        for (std::size_t a = 0; a < na; ++a) {
          double w = eval(1.0 / (digits_[a] + grid_[i]));
          g_lo[i * na + a] = w - err;
          g_hi[i * na + a] = w + err;
        }
      }
      double lower = std::numeric_limits<double>::infinity();
      double upper = 0.0;
      for (unsigned c = 0; c < cells_; ++c) {
        // F decreasing, 1/(a+x) decreasing: extremes sit at the cell ends
        const std::size_t l = c, r = c + 1;
        if (f_lo[r] <= 0.0) return {0.0, std::numeric_limits<double>::infinity()};
        double up = 0.0, down = 0.0;
        for (std::size_t a = 0; a < na; ++a) {
          up += weight[l * na + a] * g_hi[r * na + a];
          down += weight[r * na + a] * g_lo[l * na + a];
        }
        upper = std::max(upper, up / f_lo[r]);
        lower = std::min(lower, down / f_hi[l]);
      }
      best_lower = std::max(best_lower, lower);
      best_upper = std::min(best_upper, upper);
    }
    return {best_lower, best_upper};
  }

 private:
  // moments_[k-1][j] = sum_{|v| = k} w_v u_v^j with
  //   w_v = (<v> + c <tail>)^{-2s},  u_v = <tail> / (<v> + c <tail>)
  // where tail = v_2..v_k and c is the expansion centre. Then
  //   F_k(x) = sum_j binom(-2s, j) (x - c)^j moments_[k-1][j].
  void accumulate(double s) {
    moments_.assign(depth_, std::vector<double>(kTaylorTerms + 1, 0.0));
    max_u_.assign(depth_, 0.0);
    for (Digit a : digits_) visit(1, a, 1.0, 1.0, 0.0, -2.0 * s);
  }

  void visit(unsigned level, double q, double q_prev, double tail, double tail_prev, double exponent) {
    double base = q + center_ * tail;
    double w = std::pow(base, exponent);
    double u = tail / base;
    auto& m = moments_[level - 1];
    double p = w;
    for (unsigned j = 0; j <= kTaylorTerms; ++j) {
      m[j] += p;
      p *= u;
    }
    max_u_[level - 1] = std::max(max_u_[level - 1], u);
    if (level == depth_) return;
    for (Digit a : digits_) visit(level + 1, a * q + q_prev, q, a * tail + tail_prev, tail, exponent);
  }

  // sum_{j > K} |binom(-t, j)| r^j * moments[k][0], r = max |x - c| * max u
  double tail_bound(double t, unsigned k) const {
    double r = std::max(hi_ - center_, center_ - lo_) * max_u_[k];
    double coef = 1.0, pw = 1.0, tail = 0.0;
    for (unsigned j = 1; j <= kTaylorTerms + 2000; ++j) {
      coef *= (t + (j - 1)) / j;
      pw *= r;
      if (j > kTaylorTerms) {
        double term = coef * pw;
        tail += term;
        if (term < 1e-30 * tail || term == 0.0) break;
      }
    }
    return tail * moments_[k][0];
  }

  std::vector<double> digits_;
  unsigned depth_;
  double lo_, hi_, center_;
  unsigned cells_;
  std::vector<double> grid_;
  std::vector<std::vector<double>> moments_;
  std::vector<double> max_u_;
};

unsigned default_refine_depth(const Alphabet& alphabet) {
  unsigned depth = 1;
  while (depth < 32 &&
         word_count(alphabet, depth + 1, std::uint64_t{1} << 18) <= (std::uint64_t{1} << 18)) {
    ++depth;
  }
  return depth;
}

struct Root {
  double value;
  bool clamped;
};

// Smallest s in [0, 1] (to tolerance) where `holds` becomes true; `holds` is
// true for large s. The returned point always satisfies `holds`, unless the
// root was clamped at 1.
Root upper_root(const std::function<bool(double)>& holds, double tol) {
  if (holds(0.0)) return {0.0, true};
  if (!holds(1.0)) return {1.0, true};
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  return {hi, false};
}

// Largest s where `holds` is still true; `holds` is true for small s. The
// returned point always satisfies `holds`.
Root lower_root(const std::function<bool(double)>& holds, double tol) {
  if (!holds(0.0)) return {0.0, true};
  if (holds(1.0)) return {1.0, true};
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (holds(mid) ? lo : hi) = mid;
  }
  return {lo, lo <= tol};
}

}  // namespace

double partition_sum(const Alphabet& alphabet, unsigned n, double s) {
  if (n == 0) throw DomainError("partition_sum needs n >= 1");
  if (!(s > 0.0 && s < 1.0)) throw DomainError("partition_sum needs 0 < s < 1");
  CompensatedSum acc;
  partition_dfs(alphabet.digits(), n, 1.0, 0.0, -2.0 * s, acc);
  return acc.value();
}

PressureBracket dimension_bracket(const Alphabet& alphabet, unsigned n, const BracketOptions& options) {
  if (n == 0) throw DomainError("dimension_bracket needs n >= 1");
  if (options.threads == 0) throw DomainError("dimension_bracket needs at least one thread");
  if (!(options.tolerance > 0.0)) throw DomainError("bisection tolerance must be positive");
  if (word_count(alphabet, n, options.max_words) > options.max_words) {
    throw ResourceError("dimension bracket at n = " + std::to_string(n) + " needs more than " +
                        std::to_string(options.max_words) + " words");
  }
  auto start = std::chrono::steady_clock::now();
  PressureBracket out;
  out.n = n;

  ContinuantProfile profile(alphabet, n, options.threads);
  auto up = upper_root(
      [&](double s) {
        ++out.evaluations;
        return profile.upper(s) <= 1.0;
      },
      options.tolerance);
  auto down = lower_root(
      [&](double s) {
        ++out.evaluations;
        return profile.lower(s) >= std::exp2(2.0 * s);
      },
      options.tolerance);
  out.coarse_upper = up.value;
  out.coarse_lower = down.value;
  out.clamped = up.clamped || down.clamped;
  out.s_lower = out.coarse_lower;
  out.s_upper = out.coarse_upper;

  if (options.refine) {
    unsigned cap = options.refine_depth_cap ? options.refine_depth_cap : default_refine_depth(alphabet);
    out.refine_depth = std::min(n, cap);
    TransferRatio ratio(alphabet, out.refine_depth, std::max(1u, options.refine_cells));
    auto r_up = upper_root(
        [&](double s) {
          ++out.evaluations;
          return ratio.bounds(s).second <= 1.0;
        },
        options.tolerance);
    auto r_down = lower_root(
        [&](double s) {
          ++out.evaluations;
          return ratio.bounds(s).first >= 1.0;
        },
        options.tolerance);
    out.refined_upper = r_up.value;
    out.refined_lower = r_down.value;
    out.s_lower = std::max(out.s_lower, out.refined_lower);
    out.s_upper = std::min(out.s_upper, out.refined_upper);
  }
  if (out.s_lower > out.s_upper) {
    throw ConsistencyError("coarse and refined dimension brackets are disjoint");
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

PressureBracket estimate_dimension(const Alphabet& alphabet, double target_width, unsigned n_max,
                                   const BracketOptions& options,
                                   std::vector<PressureBracket>* history) {
  if (!(target_width > 0.0)) throw DomainError("target width must be positive");
  if (n_max == 0) throw DomainError("n_max must be >= 1");
  PressureBracket best;
  bool first = true;
  for (unsigned n = 1;; n = std::min(2 * n, n_max)) {
    PressureBracket b = dimension_bracket(alphabet, n, options);
    if (!first) {
      // every bracket is valid, so the intersection is too
      b.evaluations += best.evaluations;
      b.s_lower = std::max(b.s_lower, best.s_lower);
      b.s_upper = std::min(b.s_upper, best.s_upper);
    }
    first = false;
    best = b;
    if (history) history->push_back(best);
    if (best.width() <= target_width) {
      best.converged = true;
      return best;
    }
    if (n == n_max) {
      best.converged = false;
      return best;
    }
  }
}

void write_convergence_csv(std::span<const PressureBracket> rows, std::ostream& out) {
  out << "n,s_lower,s_upper,width,wall_time\n";
  auto old = out.precision(12);
  for (const auto& b : rows) {
    out << b.n << ',' << b.s_lower << ',' << b.s_upper << ',' << b.width() << ',' << b.wall_seconds
        << '\n';
  }
  out.precision(old);
}

}  // namespace zaremba
