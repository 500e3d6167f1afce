#pragma once

// Products Omega_1 Omega_2 ... Omega_k of word sets with unique factorization,
// and checks of their norm (continuant) windows and sizes.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zaremba/cf_core.hpp"

namespace zaremba {

using WordSet = std::vector<Word>;

struct NormWindow {
  double lo = 1.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(UInt128 norm) const;
};

struct FactoredEnsemble {
  Alphabet alphabet;
  std::vector<WordSet> factors;
  std::optional<std::vector<NormWindow>> norm_windows;

  // prod |Omega_i|; throws OverflowError beyond 128 bits.
  UInt128 product_size() const;
};

// Scale parameters and the constants of the norm windows
//   g1:   [M1 / (c_g1 A^2),               k_g1 M1^(1+2e)]
//   rest: [N / (c_rest A^2 M1^(1+2e)),    c_hi A^2 N / M1]
//   g2:   [M2 / (c_g2 A^2 M1^(2e)),       c_hi A^2 M2 (M1 M2)^(2e)]
//   g4:   [M4^(1-e) / (c_g2 A^2),         c_hi A^2 M4]
// with A the largest digit and e = epsilon0.
struct EnsembleParams {
  double m1 = 1.0;
  double m2 = 1.0;
  double m4 = 1.0;
  double epsilon0 = 0.0001;
  double c_g1 = 70.0;
  double c_rest = 160.0;
  double c_g2 = 150.0;
  double c_hi = 73.0;
  double k_g1 = 1.01;

  // Throws DomainError unless epsilon0 in (0, 0.0004), m-values >= 1 and constants > 0.
  void validate() const;

  NormWindow g1_window(const Alphabet& a) const;
  NormWindow rest_window(const Alphabet& a, double n_limit) const;
  NormWindow g2_window(const Alphabet& a) const;
  NormWindow g4_window(const Alphabet& a) const;
};

// Omega_i = all words of length n_i. Throws DomainError on empty or zero
// lengths and ResourceError if a factor would exceed 10^7 words.
FactoredEnsemble build_fixed_length_ensemble(const Alphabet& alphabet,
                                             const std::vector<std::size_t>& lengths);

struct PrefixReport {
  std::size_t size = 0;
  UInt128 min_norm = 0;
  UInt128 max_norm = 0;
  bool within_doubling_bound = false;  // max <= 2 A m1
  bool within_growth_bound = false;    // max <= (A+1) m1
  std::size_t odd_length = 0;          // words whose continuant is not a matrix norm
};

struct PrefixSplit {
  WordSet prefixes;  // sorted
  PrefixReport report;
};

// Minimal words whose continuant reaches m1. Requires 1 < m1 < N; throws
// DomainError otherwise.
PrefixSplit split_by_norm(const Alphabet& alphabet, std::uint64_t n_limit, std::uint64_t m1);

struct IndependenceReport {
  bool independent = false;
  UInt128 product_size = 0;
  std::uint64_t distinct = 0;
};

// Materializes every concatenation. Throws ResourceError past 10^7 tuples.
IndependenceReport check_independence(const FactoredEnsemble& ensemble, unsigned threads = 1);
bool verify_independence(const FactoredEnsemble& ensemble, unsigned threads = 1);

struct FactorWindowReport {
  std::size_t index = 0;
  std::size_t size = 0;
  UInt128 min_norm = 0;
  UInt128 max_norm = 0;
  NormWindow window;
  bool pass = false;
};

// Uses ensemble.norm_windows, one per factor (DomainError if absent or of the
// wrong length). Empty factors fail.
std::vector<FactorWindowReport> verify_norm_windows(const FactoredEnsemble& ensemble);

struct CardinalityRow {
  std::size_t index = 0;
  std::size_t size = 0;
  UInt128 max_norm = 0;
  double exponent = 0.0;  // log|Omega_i| / log(max norm), 0 when either is 1
  double target = 0.0;    // 2 delta_hat
};

std::vector<CardinalityRow> factor_cardinality_check(const FactoredEnsemble& ensemble, double delta_hat);

nlohmann::json to_json(const PrefixReport& r);
nlohmann::json to_json(const IndependenceReport& r);
nlohmann::json to_json(const std::vector<FactorWindowReport>& rows);
nlohmann::json to_json(const std::vector<CardinalityRow>& rows);

}  // namespace zaremba
