#pragma once

// Rational approximation of frequencies theta in [0,1) at scale N,
//   theta = { a/q + l/(2N) + lambda/N },
// classification into (alpha, beta) cells of a geometric scale sequence,
// and the exponential sum sigma = sum_{theta in Z} |sum_d r(d) e(d theta)|.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace zaremba {

class CensusResult;

// Q_0 = 0, Q_j = q1^j.
class ScaleSequence {
 public:
  // Throws DomainError for q1 < 2.
  explicit ScaleSequence(std::uint64_t q1);

  std::uint64_t q1() const { return q1_; }
  // Saturates at UINT64_MAX.
  std::uint64_t operator[](unsigned j) const;

 private:
  std::uint64_t q1_;
};

struct DirichletData {
  double theta = 0.0;
  std::uint64_t a = 0;
  std::uint64_t q = 1;
  std::int64_t l = 0;
  double lambda = 0.0;

  friend bool operator==(const DirichletData&, const DirichletData&) = default;
};

struct CellIndex {
  unsigned alpha = 1;
  unsigned beta = 1;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// a/q is the convergent of theta closest to theta among those with
// q <= sqrt(N)/q1; l and lambda then place the remainder. Requires
// theta in [0,1) and N >= q1^2. Throws ConsistencyError if the result breaks
// |l| <= 3 q1 sqrt(N) / q.
DirichletData dirichlet_decompose(double theta, std::uint64_t n_limit, const ScaleSequence& scale);

// {a/q + l/(2N) + lambda/N}
double reconstruct(const DirichletData& data, std::uint64_t n_limit);

// Human-readable list of violated constraints; empty when all hold.
std::vector<std::string> constraint_violations(const DirichletData& data, std::uint64_t n_limit,
                                               const ScaleSequence& scale);

// alpha: smallest j >= 1 with q <= Q_j. beta: smallest j >= 1 with |l| <= Q_j.
CellIndex cell_of(const DirichletData& data, const ScaleSequence& scale);

// Q_{alpha-1} < q <= Q_alpha and Q_{beta-1} <= |l| <= Q_beta, where |l| equal
// to a boundary Q_j belongs to the cell with the smaller beta.
bool in_cell(const DirichletData& data, CellIndex cell, const ScaleSequence& scale);

// (d, r(d)) pairs.
using Multiplicities = std::vector<std::pair<std::uint64_t, std::uint64_t>>;

// Nonzero histogram entries of a census.
Multiplicities multiplicities_of(const CensusResult& census);

// |sum_d r(d) e(d theta)|
double exponential_sum_modulus(double theta, std::span<const std::pair<std::uint64_t, std::uint64_t>> r);

// sum over theta of exponential_sum_modulus. Threads split the frequencies;
// the reduction runs in input order. Throws DomainError on empty r.
double sigma_nz(std::span<const double> frequencies,
                std::span<const std::pair<std::uint64_t, std::uint64_t>> r, unsigned threads = 1);

// sigma (Q_alpha Q_beta)^c / (|Omega| sqrt|Z|). Throws DomainError unless all
// arguments are positive (c may be zero).
double bound_diagnostic(double sigma, double omega_size, double z_size, CellIndex cell, double c,
                        const ScaleSequence& scale);

struct CellSummary {
  CellIndex cell;
  std::uint64_t count = 0;
  double sigma_part = 0.0;
};

// Groups frequencies by cell, sorted by (alpha, beta).
std::vector<CellSummary> cell_table(std::span<const double> frequencies, std::uint64_t n_limit,
                                    const ScaleSequence& scale,
                                    std::span<const std::pair<std::uint64_t, std::uint64_t>> r);

// "alpha,beta,count,sigma_part"
void write_cell_csv(std::span<const CellSummary> rows, std::ostream& out);

}  // namespace zaremba
