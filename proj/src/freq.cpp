#include "zaremba/freq.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <thread>

#include "zaremba/census.hpp"
#include "zaremba/errors.hpp"

namespace zaremba {

ScaleSequence::ScaleSequence(std::uint64_t q1) : q1_(q1) {
  if (q1 < 2) throw DomainError("scale sequence needs Q1 >= 2");
}

std::uint64_t ScaleSequence::operator[](unsigned j) const {
  if (j == 0) return 0;
  std::uint64_t v = 1;
  for (unsigned i = 0; i < j; ++i) {
    if (v > std::numeric_limits<std::uint64_t>::max() / q1_) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    v *= q1_;
  }
  return v;
}

namespace {

using Int128 = __int128;

// (q * q1)^2 <= N, i.e. q <= sqrt(N)/q1, exactly.
bool within_denominator_bound(std::uint64_t q, std::uint64_t n_limit, std::uint64_t q1) {
  UInt128 x = static_cast<UInt128>(q) * q1;
  return x * x <= n_limit;
}

long double frac(long double x) { return x - std::floor(x); }

// Distance on the circle R/Z.
long double circle_distance(long double x, long double y) {
  long double d = std::fabs(frac(x) - frac(y));
  return std::min(d, 1.0L - d);
}

}  // namespace

DirichletData dirichlet_decompose(double theta, std::uint64_t n_limit, const ScaleSequence& scale) {
  if (!std::isfinite(theta) || theta < 0.0 || theta >= 1.0) {
    throw DomainError("theta must lie in [0, 1)");
  }
  const std::uint64_t q1 = scale.q1();
  if (static_cast<UInt128>(q1) * q1 > n_limit) throw DomainError("dirichlet_decompose needs N >= Q1^2");
  // q <= sqrt(N)/q1 <= 2^32 always
  DirichletData out;
  out.theta = theta;

  std::uint64_t a = 0, q = 1;
  long double diff = theta;
  if (theta >= 0x1p-37) {
    // theta = num / den exactly, den = 2^k <= 2^90
    int exp2 = 0;
    double mant = std::frexp(theta, &exp2);  // theta = mant * 2^exp2, mant in [1/2, 1)
    auto num = static_cast<UInt128>(std::ldexp(mant, 53));
    UInt128 den = static_cast<UInt128>(1) << (53 - exp2);
    while ((num & 1) == 0 && (den & 1) == 0) {
      num >>= 1;
      den >>= 1;
    }
    // convergents h/k of num/den
    UInt128 h_prev = 1, h = 0, k_prev = 0, k = 1;  // h/k = 0/1 (a_0 = 0)
    UInt128 x = den, y = num;                       // continue with den/num
    while (y != 0) {
      UInt128 digit = x / y;
      UInt128 r = x % y;
      UInt128 h_next = digit * h + h_prev;
      UInt128 k_next = digit * k + k_prev;
      if (k_next > (static_cast<UInt128>(1) << 40) ||
          !within_denominator_bound(static_cast<std::uint64_t>(k_next), n_limit, q1)) {
        break;
      }
      h_prev = h;
      h = h_next;
      k_prev = k;
      k = k_next;
      x = y;
      y = r;
    }
    a = static_cast<std::uint64_t>(h);
    q = static_cast<std::uint64_t>(k);
    // theta - a/q = (num q - a den) / (den q), numerator below 2^123
    Int128 top = static_cast<Int128>(num) * static_cast<Int128>(q) -
                 static_cast<Int128>(a) * static_cast<Int128>(den);
    diff = static_cast<long double>(top) / static_cast<long double>(den) / static_cast<long double>(q);
  }
  if (a == q) a = 0;  // the convergent 1/1 is 0/1 on the circle

  const auto big_n = static_cast<long double>(n_limit);
  long double two_n_diff = 2.0L * big_n * diff;
  auto l = static_cast<std::int64_t>(std::llround(two_n_diff));
  long double lambda = big_n * diff - 0.5L * static_cast<long double>(l);
  if (lambda <= -0.25L) {
    --l;
    lambda += 0.5L;
  } else if (lambda > 0.25L) {
    ++l;
    lambda -= 0.5L;
  }
  out.a = a;
  out.q = q;
  out.l = l;
  out.lambda = static_cast<double>(lambda);
  if (out.lambda <= -0.25) out.lambda = std::nextafter(-0.25, 0.0);

  long double l_bound = 3.0L * q1 * std::sqrt(big_n) / static_cast<long double>(q);
  if (std::fabs(static_cast<long double>(l)) > l_bound) {
    throw ConsistencyError("Dirichlet decomposition of theta = " + std::to_string(theta) +
                           " breaks the bound on l");
  }
  return out;
}

double reconstruct(const DirichletData& data, std::uint64_t n_limit) {
  const auto big_n = static_cast<long double>(n_limit);
  long double x = static_cast<long double>(data.a) / static_cast<long double>(data.q) +
                  static_cast<long double>(data.l) / (2.0L * big_n) +
                  static_cast<long double>(data.lambda) / big_n;
  return static_cast<double>(frac(x));
}

std::vector<std::string> constraint_violations(const DirichletData& data, std::uint64_t n_limit,
                                               const ScaleSequence& scale) {
  std::vector<std::string> out;
  if (data.q == 0 || std::gcd(data.a, data.q) != 1) out.push_back("gcd(a, q) != 1");
  if (data.q == 0 || data.a >= data.q || !within_denominator_bound(data.q, n_limit, scale.q1())) {
    out.push_back("0 <= a < q <= sqrt(N)/Q1 fails");
  }
  if (!(data.lambda > -0.25 && data.lambda <= 0.25)) out.push_back("lambda outside (-1/4, 1/4]");
  long double l_bound = 3.0L * scale.q1() * std::sqrt(static_cast<long double>(n_limit)) /
                        static_cast<long double>(std::max<std::uint64_t>(data.q, 1));
  if (std::fabs(static_cast<long double>(data.l)) > l_bound) out.push_back("|l| > 3 Q1 sqrt(N) / q");
  if (data.a == 0 && data.q != 1) out.push_back("a = 0 with q != 1");
  long double x = static_cast<long double>(data.a) / static_cast<long double>(std::max<std::uint64_t>(data.q, 1)) +
                  static_cast<long double>(data.l) / (2.0L * n_limit) +
                  static_cast<long double>(data.lambda) / n_limit;
  if (circle_distance(x, data.theta) > 1e-12L) out.push_back("reconstruction error above 1e-12");
  return out;
}

CellIndex cell_of(const DirichletData& data, const ScaleSequence& scale) {
  CellIndex c;
  while (data.q > scale[c.alpha]) ++c.alpha;
  const std::uint64_t abs_l = data.l < 0 ? 0 - static_cast<std::uint64_t>(data.l)
                                         : static_cast<std::uint64_t>(data.l);
  while (abs_l > scale[c.beta]) ++c.beta;
  return c;
}

bool in_cell(const DirichletData& data, CellIndex cell, const ScaleSequence& scale) {
  if (cell.alpha == 0 || cell.beta == 0) return false;
  const std::uint64_t abs_l = data.l < 0 ? 0 - static_cast<std::uint64_t>(data.l)
                                         : static_cast<std::uint64_t>(data.l);
  bool alpha_ok = scale[cell.alpha - 1] < data.q && data.q <= scale[cell.alpha];
  bool beta_ok = scale[cell.beta - 1] <= abs_l && abs_l <= scale[cell.beta];
  // the lower boundary Q_{beta-1} >= 1 already belongs to cell beta-1
  if (cell.beta >= 2 && abs_l == scale[cell.beta - 1]) beta_ok = false;
  return alpha_ok && beta_ok;
}

Multiplicities multiplicities_of(const CensusResult& census) {
  Multiplicities out;
  auto hist = census.histogram();
  for (std::size_t i = 0; i < hist.size(); ++i)
    if (hist[i] > 0) out.emplace_back(census.window().lo + i, hist[i]);
  return out;
}

double exponential_sum_modulus(double theta,
                               std::span<const std::pair<std::uint64_t, std::uint64_t>> r) {
  // compensated sums of the real and imaginary parts
  double re = 0.0, re_c = 0.0, im = 0.0, im_c = 0.0;
  auto add = [](double& sum, double& comp, double x) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  const long double th = theta;
  for (const auto& [d, count] : r) {
    long double phase = frac(static_cast<long double>(d) * th);
    double angle = static_cast<double>(2.0L * std::numbers::pi_v<long double> * phase);
    double w = static_cast<double>(count);
    add(re, re_c, w * std::cos(angle));
    add(im, im_c, w * std::sin(angle));
  }
  return std::hypot(re, im);
}

double sigma_nz(std::span<const double> frequencies,
                std::span<const std::pair<std::uint64_t, std::uint64_t>> r, unsigned threads) {
  if (r.empty()) throw DomainError("sigma_nz needs a non-empty multiplicity map");
  if (threads == 0) throw DomainError("sigma_nz needs at least one thread");
  std::vector<double> moduli(frequencies.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < frequencies.size(); i = next.fetch_add(1)) {
      moduli[i] = exponential_sum_modulus(frequencies[i], r);
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  double sum = 0.0, comp = 0.0;
  for (double m : moduli) {
    double y = m - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double bound_diagnostic(double sigma, double omega_size, double z_size, CellIndex cell, double c,
                        const ScaleSequence& scale) {
  if (!(sigma > 0.0 && omega_size > 0.0 && z_size > 0.0 && c >= 0.0)) {
    throw DomainError("bound_diagnostic needs positive sigma, |Omega|, |Z| and c >= 0");
  }
  double qa = static_cast<double>(scale[cell.alpha]);
  double qb = static_cast<double>(scale[cell.beta]);
  return sigma * std::pow(qa * qb, c) / (omega_size * std::sqrt(z_size));
}

std::vector<CellSummary> cell_table(std::span<const double> frequencies, std::uint64_t n_limit,
                                    const ScaleSequence& scale,
                                    std::span<const std::pair<std::uint64_t, std::uint64_t>> r) {
  std::map<CellIndex, CellSummary> cells;
  for (double theta : frequencies) {
    auto data = dirichlet_decompose(theta, n_limit, scale);
    auto idx = cell_of(data, scale);
    auto& row = cells[idx];
    row.cell = idx;
    ++row.count;
    if (!r.empty()) row.sigma_part += exponential_sum_modulus(theta, r);
  }
  std::vector<CellSummary> out;
  for (auto& [idx, row] : cells) out.push_back(row);
  return out;
}

void write_cell_csv(std::span<const CellSummary> rows, std::ostream& out) {
  out << "alpha,beta,count,sigma_part\n";
  auto old = out.precision(15);
  for (const auto& row : rows) {
    out << row.cell.alpha << ',' << row.cell.beta << ',' << row.count << ',' << row.sigma_part << '\n';
  }
  out.precision(old);
}

}  // namespace zaremba
