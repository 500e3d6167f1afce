#include <numeric>

#include "doctest.h"
#include "zaremba/congruence.hpp"
#include "zaremba/errors.hpp"

using namespace zaremba;

TEST_CASE("congruence examples") {
  auto xi = VectorSet::random(13, 40, 1);
  CHECK(rq_direct(xi, 1) == 169);
  CHECK(rq_charsum(xi, 1) == 169);

  VectorSet one({{1, 1}});
  CHECK(rq_direct(one, 5) == 1);
  CHECK(rq_charsum(one, 5) == 1);

  VectorSet pair({{1, 1}, {1, 2}});
  CHECK(rq_direct(pair, 2) == 2);
  CHECK(rq_charsum(pair, 2) == 2);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(VectorSet({{2, 4}}), DomainError);
  CHECK_THROWS_AS(VectorSet({{0, 1}}), DomainError);
  CHECK_THROWS_AS(rq_direct(VectorSet(), 0), DomainError);
  CHECK_THROWS_AS(rq_charsum(VectorSet(), 0), DomainError);
  CHECK(rq_direct(VectorSet(), 7) == 0);
  CHECK(rq_charsum(VectorSet(), 7) == 0);
}

TEST_CASE("inverse mod") {
  for (std::uint64_t m = 1; m <= 60; ++m)
    for (std::uint64_t a = 1; a < 3 * m; ++a)
      if (std::gcd(a, m) == 1) CHECK((a * inverse_mod(a, m)) % m == 1 % m);
  CHECK_THROWS_AS(inverse_mod(4, 6), DomainError);
}

TEST_CASE("both counts agree on random instances") {
  std::uint64_t seed = 100;
  for (std::uint64_t q = 1; q <= 50; ++q) {
    for (std::size_t size : {1, 7, 30}) {
      auto xi = VectorSet::random(size, 3 * q + 5, seed++);
      auto direct = rq_direct(xi, q);
      CHECK(rq_charsum(xi, q) == direct);
      CHECK(direct >= xi.size());
      CHECK(rq_direct(xi.reversed(), q) == direct);
    }
  }
}

TEST_CASE("symmetry of the relation") {
  auto xi = VectorSet::random(25, 100, 9);
  for (std::uint64_t q : {6, 12, 30, 49}) {
    for (const auto& x : xi.vectors())
      for (const auto& y : xi.vectors()) {
        VectorSet xy({x, y}), yx({y, x});
        CHECK(rq_direct(xy, q) == rq_direct(yx, q));
      }
  }
}
