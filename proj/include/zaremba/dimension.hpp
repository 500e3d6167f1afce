#pragma once

// Two-sided bounds on the Hausdorff dimension delta_A of the set of infinite
// continued fractions with partial quotients in A.
//
// Two independent brackets are computed and intersected:
//
//  * coarse: from Z_n(s) = sum_{|w| = n} <w>^{-2s}. Since
//    <u><v> <= <uv> <= 2<u><v>, Z_n is submultiplicative and 2^{-2s} Z_n is
//    supermultiplicative, so the root of Z_n(s) = 1 bounds delta_A from
//    above and the root of Z_n(s) = 2^{2s} bounds it from below.
//
//  * refined: F_k(x) = sum_{|v| = k} (<v> + x <v_2..v_k>)^{-2s} satisfies
//    F_{k+1}(x) = sum_a (a+x)^{-2s} F_k(1/(a+x)). On the invariant interval
//    J = [1/(A+1), 1/min A] the ratio F_{k+1}/F_k is squeezed between
//    lambda_k(s) and Lambda_k(s), and exp(P(s)) lies between them too. The
//    ratio flattens geometrically in k, so modest k already gives a narrow
//    bracket. Inf/sup over J are taken cell by cell with monotone endpoint
//    bounds, and F_k is evaluated from a Taylor expansion with an explicit
//    tail bound.
//
// Floating-point rounding is not tracked.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "zaremba/cf_core.hpp"

namespace zaremba {

struct PressureBracket {
  unsigned n = 0;  // word length of the partition sums
  double s_lower = 0.0;
  double s_upper = 1.0;
  std::uint64_t evaluations = 0;  // partition-sum evaluations (one per s)

  double coarse_lower = 0.0;
  double coarse_upper = 1.0;
  double refined_lower = 0.0;
  double refined_upper = 1.0;
  unsigned refine_depth = 0;  // 0 when the refined bracket was skipped

  // A root was pinned to 0 or 1 (e.g. the single-point alphabet {1}).
  bool clamped = false;
  // Only meaningful for estimate_dimension.
  bool converged = true;
  double wall_seconds = 0.0;

  double width() const { return s_upper - s_lower; }
  double midpoint() const { return 0.5 * (s_lower + s_upper); }
};

struct BracketOptions {
  unsigned threads = 1;
  double tolerance = 1e-10;
  bool refine = true;
  // Deepest transfer level; 0 picks the largest k with |A|^k <= 2^18.
  unsigned refine_depth_cap = 0;
  unsigned refine_cells = 4096;
  // Coarse sums refuse more than this many length-n words.
  std::uint64_t max_words = std::uint64_t{1} << 34;
};

// sum over all |A|^n words w of length n of <w>^{-2s}, compensated summation.
// Requires n >= 1 and 0 < s < 1.
double partition_sum(const Alphabet& alphabet, unsigned n, double s);

// Bracket at word length n >= 1.
PressureBracket dimension_bracket(const Alphabet& alphabet, unsigned n,
                                  const BracketOptions& options = {});

// Doubles n from 1 until width <= target_width or n would exceed n_max. An
// unconverged result carries converged = false. Each step is intersected
// with the previous ones. `history` receives every step when non-null.
PressureBracket estimate_dimension(const Alphabet& alphabet, double target_width,
                                   unsigned n_max, const BracketOptions& options = {},
                                   std::vector<PressureBracket>* history = nullptr);

// "n,s_lower,s_upper,width,wall_time"
void write_convergence_csv(std::span<const PressureBracket> rows, std::ostream& out);

}  // namespace zaremba
