#pragma once

// Enumeration of all non-empty words over an alphabet whose continuant is at
// most N. Produces the denominator set D_A(N) as a bitset together with the
// multiplicity histogram r(d) = #{words w : <w> = d} over a window of d.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "zaremba/cf_core.hpp"

namespace zaremba {

struct HistogramWindow {
  std::uint64_t lo = 1;
  std::uint64_t hi = 1;

  bool contains(std::uint64_t d) const { return lo <= d && d <= hi; }
  std::uint64_t width() const { return hi - lo + 1; }
  friend bool operator==(const HistogramWindow&, const HistogramWindow&) = default;
};

// [ceil(N/2), N]
HistogramWindow upper_half_window(std::uint64_t n_limit);

struct CensusConfig {
  Alphabet alphabet{1};
  std::uint64_t n_limit = 1;
  unsigned thread_count = 1;
  // Defaults to upper_half_window(n_limit). Use [1, N] for a full histogram.
  std::optional<HistogramWindow> histogram_window;
  // When set, partial results are flushed here after every batch of
  // subtrees and an existing compatible checkpoint is resumed.
  std::optional<std::filesystem::path> checkpoint_path;

  HistogramWindow resolved_window() const;
  // Throws DomainError on n_limit == 0, thread_count == 0 or a window that
  // is not inside [1, n_limit].
  void validate() const;
};

class CensusResult {
 public:
  CensusResult(Alphabet alphabet, std::uint64_t n_limit, HistogramWindow window);

  const Alphabet& alphabet() const { return alphabet_; }
  std::uint64_t n_limit() const { return n_limit_; }
  const HistogramWindow& window() const { return window_; }
  std::uint64_t word_count() const { return word_count_; }
  // True unless the histogram covers all of [1, N].
  bool windowed() const { return window_.lo != 1 || window_.hi != n_limit_; }

  bool contains(std::uint64_t d) const {
    return d >= 1 && d <= n_limit_ && ((bits_[(d - 1) >> 6] >> ((d - 1) & 63)) & 1U);
  }
  // |D_A(N)|
  std::uint64_t cardinality() const;
  // |D_A(N) ∩ [lo, hi]|
  std::uint64_t cardinality(std::uint64_t lo, std::uint64_t hi) const;
  // r(d); throws DomainError if d is outside the histogram window.
  std::uint64_t multiplicity(std::uint64_t d) const;
  std::span<const std::uint64_t> histogram() const { return counts_; }
  std::span<const std::uint64_t> bit_words() const { return bits_; }
  // d <= N with d not in D_A(N), ascending.
  std::vector<std::uint64_t> missing() const;

  // Shard interface used by the enumerator and the file loader.
  void mark(std::uint64_t d) {
    bits_[(d - 1) >> 6] |= std::uint64_t{1} << ((d - 1) & 63);
    if (window_.contains(d)) ++counts_[d - window_.lo];
    ++word_count_;
  }
  void merge(const CensusResult& shard);
  std::span<std::uint64_t> mutable_bit_words() { return bits_; }
  std::span<std::uint64_t> mutable_histogram() { return counts_; }
  void set_word_count(std::uint64_t n) { word_count_ = n; }

  friend bool operator==(const CensusResult&, const CensusResult&) = default;

 private:
  Alphabet alphabet_;
  std::uint64_t n_limit_;
  HistogramWindow window_;
  std::uint64_t word_count_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint64_t> counts_;
};

// Progress callback: (subtrees done, subtrees total).
using CensusProgress = std::function<void(std::size_t, std::size_t)>;

// Depth-first traversal of the digit tree, pruned as soon as the continuant
// exceeds N. The result does not depend on thread_count.
CensusResult enumerate_denominators(const CensusConfig& config,
                                    const CensusProgress& progress = {});

// |D_A(N)| / N
double proportion(const CensusResult& result);

struct MultiplicityPoint {
  std::uint64_t n_limit;
  double mean_multiplicity;  // over D_A ∩ [N/2, N]
};

struct MultiplicityFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<MultiplicityPoint> points;
  std::vector<double> residuals;  // in log space
  double rms_residual = 0.0;
};

// Mean multiplicity of d in D_A ∩ [ceil(N/2), N]. Throws DomainError if the
// histogram window does not cover that range or the range holds no d.
double mean_upper_half_multiplicity(const CensusResult& result);

// Least-squares slope of log(mean multiplicity) against log N. Needs at least
// two results over the same alphabet with pairwise distinct N.
MultiplicityFit multiplicity_exponent(std::span<const CensusResult> results);

// Binary "ZCEN" file.
void save_census(const CensusResult& result, const std::filesystem::path& path);
CensusResult load_census(const std::filesystem::path& path);
void write_census(const CensusResult& result, std::ostream& out);
CensusResult read_census(std::istream& in);

// "d,r_d" rows for every d in the window with r(d) > 0.
void write_histogram_csv(const CensusResult& result, std::ostream& out);

}  // namespace zaremba
