#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "zaremba/dimension.hpp"
#include "zaremba/errors.hpp"

using namespace zaremba;

namespace {

// Root of Z_{n+1}(s) = Z_n(s) from plain partition sums. Consecutive roots
// straddle delta_A, so the midpoint of two of them is a sharp estimate.
double ratio_root(const Alphabet& a, unsigned n) {
  double lo = 1e-6, hi = 1.0 - 1e-6;
  while (hi - lo > 1e-11) {
    double mid = 0.5 * (lo + hi);
    (partition_sum(a, n + 1, mid) > partition_sum(a, n, mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Root of Z_n(s) = target(s) from plain partition sums.
template <class F>
double exact_root(const Alphabet& a, unsigned n, F target) {
  double lo = 1e-6, hi = 1.0 - 1e-6;
  while (hi - lo > 1e-11) {
    double mid = 0.5 * (lo + hi);
    (partition_sum(a, n, mid) > target(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("partition sum examples") {
  for (double s : {0.1, 0.5, 0.9}) CHECK(partition_sum(Alphabet{1}, 1, s) == 1.0);
  CHECK(partition_sum(Alphabet{1, 2}, 1, 0.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(partition_sum(Alphabet{1, 2}, 2, 0.5) ==
        doctest::Approx(1.0 / 2 + 1.0 / 3 + 1.0 / 3 + 1.0 / 5).epsilon(1e-15));
  CHECK_THROWS_AS(partition_sum(Alphabet{1}, 0, 0.5), DomainError);
  CHECK_THROWS_AS(partition_sum(Alphabet{1}, 1, 1.0), DomainError);
  CHECK_THROWS_AS(partition_sum(Alphabet{1}, 1, 0.0), DomainError);
}

TEST_CASE("partition sum is strictly decreasing in s") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  const std::vector<Alphabet> alphabets{Alphabet{1, 2}, Alphabet{2, 3}, Alphabet::range(4),
                                        Alphabet{1, 5, 9}, Alphabet{3}};
  for (int i = 0; i < 100; ++i) {
    const Alphabet& a = alphabets[rng() % alphabets.size()];
    unsigned n = 1 + static_cast<unsigned>(rng() % 7);
    double s = unit(rng), t = unit(rng);
    if (s > t) std::swap(s, t);
    if (t - s < 1e-6) continue;
    REQUIRE(partition_sum(a, n, s) > partition_sum(a, n, t));
  }
}

TEST_CASE("partition sums are submultiplicative") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const std::vector<Alphabet> alphabets{Alphabet{1, 2}, Alphabet::range(3), Alphabet{2, 7}};
  for (int i = 0; i < 60; ++i) {
    const Alphabet& a = alphabets[rng() % alphabets.size()];
    unsigned n = 1 + static_cast<unsigned>(rng() % 5), m = 1 + static_cast<unsigned>(rng() % 5);
    double s = unit(rng);
    double joint = partition_sum(a, n + m, s);
    double split = partition_sum(a, n, s) * partition_sum(a, m, s);
    REQUIRE(joint <= split * (1 + 1e-12));
    // and the factor-2 lower bound
    REQUIRE(joint >= std::exp2(-2 * s) * split * (1 - 1e-12));
  }
}

TEST_CASE("coarse bracket matches exact partition-sum roots") {
  BracketOptions coarse_only;
  coarse_only.refine = false;
  for (const Alphabet& a : {Alphabet{1, 2}, Alphabet::range(4), Alphabet{2, 3, 5}}) {
    for (unsigned n : {3u, 6u}) {
      auto b = dimension_bracket(a, n, coarse_only);
      double up = exact_root(a, n, [](double) { return 1.0; });
      double down = exact_root(a, n, [](double s) { return std::exp2(2 * s); });
      CAPTURE(a.to_string());
      CAPTURE(n);
      CHECK(b.refine_depth == 0);
      CHECK(b.coarse_upper >= up - 1e-10);
      CHECK(b.coarse_upper <= up + 1e-4);
      CHECK(b.coarse_lower <= down + 1e-10);
      CHECK(b.coarse_lower >= down - 1e-4);
      CHECK(b.s_lower == b.coarse_lower);
      CHECK(b.s_upper == b.coarse_upper);
    }
  }
}

TEST_CASE("alphabet {1,2} bracket") {
  // oracle: midpoint of the ratio roots at n = 19 and n = 20
  double oracle = 0.5 * (ratio_root(Alphabet{1, 2}, 19) + ratio_root(Alphabet{1, 2}, 20));
  CHECK(oracle == doctest::Approx(0.5312805).epsilon(2e-6));
  auto b = dimension_bracket(Alphabet{1, 2}, 12);
  CHECK(b.s_lower <= oracle);
  CHECK(oracle <= b.s_upper);
  CHECK(b.s_lower <= 0.5313);
  CHECK(0.5313 <= b.s_upper);
  CHECK(b.width() <= 0.02);
  CHECK(b.coarse_lower <= oracle);
  CHECK(oracle <= b.coarse_upper);
  CHECK(b.refined_lower <= oracle);
  CHECK(oracle <= b.refined_upper);
  CHECK_FALSE(b.clamped);
  CHECK(b.evaluations > 0);
}

TEST_CASE("alphabet {1,2,3,4} clears 11/14") {
  auto b = dimension_bracket(Alphabet::range(4), 8);
  CHECK(b.s_lower > 11.0 / 14.0);
  CHECK(b.s_upper < 0.80);
  double oracle = 0.5 * (ratio_root(Alphabet::range(4), 8) + ratio_root(Alphabet::range(4), 9));
  CHECK(b.s_lower <= oracle);
  CHECK(oracle <= b.s_upper);
}

TEST_CASE("single digit alphabets clamp to zero") {
  for (const Alphabet& a : {Alphabet{1}, Alphabet{2}}) {
    auto b = dimension_bracket(a, 6);
    CHECK(b.clamped);
    CHECK(b.s_upper <= 1e-9);
    CHECK(b.s_lower == 0.0);
  }
}

TEST_CASE("brackets shrink along doubling n and share a point") {
  for (const Alphabet& a : {Alphabet{1, 2}, Alphabet::range(3), Alphabet{2, 3}}) {
    PressureBracket prev = dimension_bracket(a, 1);
    for (unsigned n = 2; n <= 16; n *= 2) {
      auto b = dimension_bracket(a, n);
      CAPTURE(a.to_string());
      CAPTURE(n);
      CHECK(b.s_lower <= b.s_upper);
      CHECK(b.s_upper <= prev.s_upper + 1e-9);
      CHECK(b.s_lower >= prev.s_lower - 1e-9);
      CHECK(b.coarse_upper <= prev.coarse_upper + 1e-9);
      CHECK(b.coarse_lower >= prev.coarse_lower - 1e-9);
      CHECK(std::max(b.s_lower, prev.s_lower) <= std::min(b.s_upper, prev.s_upper));
      prev = b;
    }
  }
}

TEST_CASE("thread count does not change the bracket") {
  BracketOptions one, four;
  four.threads = 4;
  auto a = dimension_bracket(Alphabet::range(3), 9, one);
  auto b = dimension_bracket(Alphabet::range(3), 9, four);
  CHECK(a.s_lower == b.s_lower);
  CHECK(a.s_upper == b.s_upper);
  CHECK(a.coarse_lower == b.coarse_lower);
}

TEST_CASE("estimate_dimension") {
  auto wide = estimate_dimension(Alphabet{1, 2}, 1.0, 20);
  CHECK(wide.n == 1);
  CHECK(wide.converged);

  std::vector<PressureBracket> history;
  auto b = estimate_dimension(Alphabet{1, 2}, 0.02, 32, {}, &history);
  CHECK(b.converged);
  CHECK(b.width() <= 0.02);
  CHECK(b.s_lower <= 0.5313);
  CHECK(b.s_upper >= 0.5312);
  CHECK(history.back().n == b.n);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i].n == 2 * history[i - 1].n);

  auto four = estimate_dimension(Alphabet::range(4), 0.01, 16);
  CHECK(four.converged);
  CHECK(four.s_lower > 0.78);
  CHECK(four.s_upper < 0.80);

  BracketOptions coarse_only;
  coarse_only.refine = false;
  auto stuck = estimate_dimension(Alphabet{1, 2}, 1e-6, 4, coarse_only);
  CHECK_FALSE(stuck.converged);
  CHECK(stuck.n == 4);

  CHECK_THROWS_AS(estimate_dimension(Alphabet{1, 2}, 0.0, 4), DomainError);
}

TEST_CASE("bracket errors and limits") {
  CHECK_THROWS_AS(dimension_bracket(Alphabet{1, 2}, 0), DomainError);
  BracketOptions small;
  small.max_words = 1000;
  CHECK_THROWS_AS(dimension_bracket(Alphabet::range(4), 6, small), ResourceError);
}

TEST_CASE("convergence csv") {
  std::vector<PressureBracket> rows(1);
  rows[0].n = 2;
  rows[0].s_lower = 0.25;
  rows[0].s_upper = 0.75;
  rows[0].wall_seconds = 0.5;
  std::ostringstream out;
  write_convergence_csv(rows, out);
  CHECK(out.str() == "n,s_lower,s_upper,width,wall_time\n2,0.25,0.75,0.5,0.5\n");
}
