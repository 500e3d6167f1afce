#include <set>
#include <sstream>

#include "doctest.h"
#include "zaremba/errors.hpp"
#include "zaremba/modular.hpp"

using namespace zaremba;

namespace {

// Residues of continuants of all even-length words of length <= max_len.
std::set<std::uint32_t> enumerated_residues(const Alphabet& a, std::uint32_t q,
                                            std::size_t max_len) {
  std::set<std::uint32_t> out;
  std::vector<Word> level{Word{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const Word& w : level)
      for (Digit d : a.digits()) next.push_back(w.concat(Word{d}));
    level = std::move(next);
    if (len % 2 == 0)
      for (const Word& w : level) out.insert(static_cast<std::uint32_t>(continuant(w) % q));
  }
  return out;
}

std::vector<Alphabet> small_alphabets() {
  std::vector<Alphabet> out;
  for (unsigned mask = 1; mask < 32; ++mask) {
    std::vector<Digit> d;
    for (Digit x = 1; x <= 5; ++x)
      if (mask & (1U << (x - 1))) d.push_back(x);
    if (d.size() <= 3) out.emplace_back(std::move(d));
  }
  return out;
}

}  // namespace

TEST_CASE("closure examples") {
  for (const Alphabet& a : {Alphabet{1}, Alphabet{2, 3}, Alphabet::range(5)}) {
    auto c = semigroup_closure_mod_q(a, 1);
    CHECK(c.residues == std::vector<std::uint32_t>{0});
  }
  // odd-indexed Fibonacci numbers F_3, F_5, ..., F_41 mod 5
  std::set<std::uint32_t> fib;
  std::uint64_t f0 = 1, f1 = 1;  // F_1, F_2
  for (int i = 3; i <= 41; ++i) {
    std::uint64_t f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
    if (i % 2 == 1) fib.insert(static_cast<std::uint32_t>(f2 % 5));
  }
  auto c5 = semigroup_closure_mod_q(Alphabet{1}, 5);
  CHECK(std::vector<std::uint32_t>(fib.begin(), fib.end()) == c5.residues);
  CHECK(c5.residues == std::vector<std::uint32_t>{0, 1, 2, 3, 4});

  CHECK(semigroup_closure_mod_q(Alphabet{1, 2}, 2).residues == std::vector<std::uint32_t>{0, 1});
  CHECK_THROWS_AS(semigroup_closure_mod_q(Alphabet{1}, 0), DomainError);
}

TEST_CASE("closure invariants") {
  auto c = semigroup_closure_mod_q(Alphabet{1, 3}, 12);
  ModMat id{1, 0, 0, 1};
  CHECK(std::binary_search(c.matrices.begin(), c.matrices.end(), id));
  for (const auto& m : c.matrices) {
    for (Digit u : {1u, 3u})
      for (Digit v : {1u, 3u}) {
        ModMat p{(m[0] + m[1] * u) % 12, (m[0] * v + m[1] * (u * v + 1)) % 12,
                 (m[2] + m[3] * u) % 12, (m[2] * v + m[3] * (u * v + 1)) % 12};
        REQUIRE(std::binary_search(c.matrices.begin(), c.matrices.end(), p));
      }
    // determinant 1 mod q
    REQUIRE((m[0] * m[3] + 12 * 12 - (m[1] * m[2]) % 144) % 12 == 1);
  }
}

TEST_CASE("identity contributes no residue") {
  // {2}: even-length continuants 5, 29, 169, ... are odd, so mod 2 only 1
  // appears; the identity's 1 is never counted on its own
  CHECK(semigroup_closure_mod_q(Alphabet{2}, 2).residues == std::vector<std::uint32_t>{1});
  // mod 4 the generator (1 2; 2 5) has order 2 so the identity is reached;
  // its residue 1 is then legitimately present
  auto c4 = semigroup_closure_mod_q(Alphabet{2}, 4);
  CHECK(std::set<std::uint32_t>(c4.residues.begin(), c4.residues.end()) ==
        enumerated_residues(Alphabet{2}, 4, 12));
  // a q where no non-empty product is congruent to the identity
  auto c3 = semigroup_closure_mod_q(Alphabet{3}, 9);
  CHECK(std::set<std::uint32_t>(c3.residues.begin(), c3.residues.end()) ==
        enumerated_residues(Alphabet{3}, 9, 40));
}

TEST_CASE("closure agrees with enumeration and with the row orbit") {
  for (const Alphabet& a : small_alphabets()) {
    for (std::uint32_t q = 1; q <= 30; ++q) {
      auto c = semigroup_closure_mod_q(a, q);
      auto enumerated = enumerated_residues(a, q, a.size() == 3 ? 10 : 12);
      CAPTURE(a.to_string());
      CAPTURE(q);
      for (auto r : enumerated) REQUIRE(c.has_residue(r));
      REQUIRE(c.residues == residues_mod_q(a, q));
    }
  }
}

TEST_CASE("closure is eventually reached by enumeration") {
  for (const Alphabet& a : {Alphabet{1}, Alphabet{2}, Alphabet{1, 2}, Alphabet{2, 4}}) {
    for (std::uint32_t q : {6u, 7u, 10u, 16u}) {
      auto c = semigroup_closure_mod_q(a, q);
      auto enumerated = enumerated_residues(a, q, a.size() == 1 ? 60 : 16);
      CHECK(std::vector<std::uint32_t>(enumerated.begin(), enumerated.end()) == c.residues);
    }
  }
}

TEST_CASE("admissibility") {
  for (std::uint64_t d : {1ull, 2ull, 17ull, 1000000ull}) {
    CHECK(is_admissible(d, Alphabet::range(5), 2));
  }
  CHECK_THROWS_AS(is_admissible(3, Alphabet{1}, 1), DomainError);

  // {2}: oracle from enumerated even-length continuants
  const Alphabet two{2};
  bool expected = true;
  for (std::uint32_t q = 2; q <= 6; ++q) {
    auto res = enumerated_residues(two, q, 40);
    if (!res.count(4 % q)) expected = false;
  }
  CHECK(is_admissible(4, two, 6) == expected);
  CHECK_FALSE(is_admissible(4, two, 6));
  CHECK(first_obstruction(4, two, 6) == 2u);
  CHECK(is_admissible(5, two, 2));
}

TEST_CASE("admissibility truncation is monotone") {
  for (const Alphabet& a : {Alphabet{2}, Alphabet{3, 4}, Alphabet{1, 2}, Alphabet{2, 5}}) {
    for (std::uint64_t d = 1; d <= 60; ++d) {
      bool prev = true;
      for (std::uint32_t q_max = 2; q_max <= 24; ++q_max) {
        bool now = is_admissible(d, a, q_max);
        if (now) REQUIRE(prev);
        prev = now;
      }
    }
  }
}

TEST_CASE("csv reports") {
  std::ostringstream counts;
  write_residue_counts_csv(Alphabet{1, 2}, 3, counts);
  CHECK(counts.str() == "q,residue_count\n2,2\n3,3\n");
  std::ostringstream verdicts;
  std::vector<std::uint64_t> ds{4, 5};
  write_admissibility_csv(ds, Alphabet{2}, 4, verdicts);
  CHECK(verdicts.str() == "d,admissible,first_obstruction\n4,false,2\n5,true,\n");
}
