#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "zaremba/census.hpp"
#include "zaremba/errors.hpp"

using namespace zaremba;

namespace {

// Level-by-level reference: materializes every word with continuant <= N.
struct Reference {
  std::map<std::uint64_t, std::uint64_t> multiplicity;
  std::uint64_t words = 0;
};

Reference reference_census(const Alphabet& alphabet, std::uint64_t n_limit) {
  Reference ref;
  std::vector<Word> level;
  for (Digit d : alphabet.digits()) level.push_back(Word{d});
  while (!level.empty()) {
    std::vector<Word> next;
    for (const Word& w : level) {
      auto c = continuant(w);
      if (c > n_limit) continue;
      ++ref.multiplicity[static_cast<std::uint64_t>(c)];
      ++ref.words;
      for (Digit d : alphabet.digits()) next.push_back(w.concat(Word{d}));
    }
    level = std::move(next);
  }
  return ref;
}

CensusConfig full_config(const Alphabet& a, std::uint64_t n, unsigned threads = 1) {
  CensusConfig c;
  c.alphabet = a;
  c.n_limit = n;
  c.thread_count = threads;
  c.histogram_window = HistogramWindow{1, n};
  return c;
}

std::vector<Alphabet> subsets_of(Digit max_digit, std::size_t max_size) {
  std::vector<Alphabet> out;
  for (unsigned mask = 1; mask < (1U << max_digit); ++mask) {
    std::vector<Digit> d;
    for (Digit x = 1; x <= max_digit; ++x)
      if (mask & (1U << (x - 1))) d.push_back(x);
    if (d.size() <= max_size) out.emplace_back(std::move(d));
  }
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("zaremba_test_" + name);
}

}  // namespace

TEST_CASE("fibonacci alphabet") {
  auto r = enumerate_denominators(full_config(Alphabet{1}, 10));
  std::vector<std::uint64_t> members;
  for (std::uint64_t d = 1; d <= 10; ++d)
    if (r.contains(d)) members.push_back(d);
  CHECK(members == std::vector<std::uint64_t>{1, 2, 3, 5, 8});
  CHECK(r.cardinality() == 5);
  CHECK(proportion(r) == doctest::Approx(0.5));
  for (auto d : members) CHECK(r.multiplicity(d) == 1);
  CHECK(r.word_count() == 5);
}

TEST_CASE("single digit words cover [1, N] when A contains all of them") {
  auto r = enumerate_denominators(full_config(Alphabet::range(10), 10));
  CHECK(r.cardinality() == 10);
  CHECK(proportion(r) == 1.0);
  for (Digit n : {1u, 7u, 30u}) {
    CHECK(proportion(enumerate_denominators(full_config(Alphabet::range(n), n))) == 1.0);
  }
}

TEST_CASE("d = 1 belongs to D_A exactly when 1 is a digit") {
  CHECK(enumerate_denominators(full_config(Alphabet{1, 3}, 50)).contains(1));
  CHECK_FALSE(enumerate_denominators(full_config(Alphabet{2, 3}, 50)).contains(1));
  auto empty = enumerate_denominators(full_config(Alphabet{5}, 3));
  CHECK(empty.cardinality() == 0);
  CHECK(empty.word_count() == 0);
}

TEST_CASE("alphabet {1..5} covers every d <= 10^5") {
  CensusConfig c;
  c.alphabet = Alphabet::range(5);
  c.n_limit = 100000;
  auto r = enumerate_denominators(c);
  CHECK(r.cardinality() == 100000);
  CHECK(r.missing().empty());
}

TEST_CASE("alphabet {1,2,3,4} at N = 10^4 regression") {
  CensusConfig c;
  c.alphabet = Alphabet::range(4);
  c.n_limit = 10000;
  auto r = enumerate_denominators(c);
  // frozen from the first reference run
  CHECK(proportion(r) == doctest::Approx(0.9998).epsilon(1e-12));
  CHECK(r.missing() == std::vector<std::uint64_t>{54, 150});
}

TEST_CASE("oracle equivalence on small alphabets") {
  for (const Alphabet& a : subsets_of(5, 3)) {
    for (std::uint64_t n : {1ull, 2ull, 13ull, 250ull, 2000ull}) {
      auto r = enumerate_denominators(full_config(a, n));
      auto ref = reference_census(a, n);
      CAPTURE(a.to_string());
      CAPTURE(n);
      REQUIRE(r.word_count() == ref.words);
      std::uint64_t hist_total = 0;
      for (std::uint64_t d = 1; d <= n; ++d) {
        auto it = ref.multiplicity.find(d);
        std::uint64_t expected = it == ref.multiplicity.end() ? 0 : it->second;
        REQUIRE(r.multiplicity(d) == expected);
        REQUIRE(r.contains(d) == (expected > 0));
        hist_total += r.multiplicity(d);
      }
      REQUIRE(hist_total == r.word_count());
    }
  }
}

TEST_CASE("membership is monotone in the alphabet") {
  std::mt19937_64 rng(11);
  auto all = subsets_of(6, 6);
  for (int iter = 0; iter < 60; ++iter) {
    const Alphabet& a = all[rng() % all.size()];
    const Alphabet& b = all[rng() % all.size()];
    if (!a.subset_of(b)) continue;
    std::uint64_t n = 1 + rng() % 3000;
    auto ra = enumerate_denominators(full_config(a, n));
    auto rb = enumerate_denominators(full_config(b, n));
    for (std::uint64_t d = 1; d <= n; ++d)
      if (ra.contains(d)) REQUIRE(rb.contains(d));
  }
}

TEST_CASE("result does not depend on the thread count") {
  CensusConfig c;
  c.alphabet = Alphabet{1, 2, 3};
  c.n_limit = 200000;
  c.thread_count = 1;
  auto one = enumerate_denominators(c);
  c.thread_count = 8;
  auto eight = enumerate_denominators(c);
  CHECK(one == eight);
  auto full1 = enumerate_denominators(full_config(Alphabet{2, 3, 5}, 5000, 1));
  auto full8 = enumerate_denominators(full_config(Alphabet{2, 3, 5}, 5000, 8));
  CHECK(full1 == full8);
}

TEST_CASE("default window is the upper half") {
  CensusConfig c;
  c.alphabet = Alphabet{1, 2};
  c.n_limit = 1001;
  auto r = enumerate_denominators(c);
  CHECK(r.window() == HistogramWindow{501, 1001});
  CHECK(r.windowed());
  CHECK_THROWS_AS(r.multiplicity(500), DomainError);
  auto full = enumerate_denominators(full_config(Alphabet{1, 2}, 1001));
  for (std::uint64_t d = 501; d <= 1001; ++d) CHECK(r.multiplicity(d) == full.multiplicity(d));
  CHECK(r.word_count() == full.word_count());
}

TEST_CASE("config validation") {
  CensusConfig c;
  c.n_limit = 0;
  CHECK_THROWS_AS(enumerate_denominators(c), DomainError);
  c.n_limit = 10;
  c.thread_count = 0;
  CHECK_THROWS_AS(enumerate_denominators(c), DomainError);
  c.thread_count = 1;
  c.histogram_window = HistogramWindow{0, 5};
  CHECK_THROWS_AS(enumerate_denominators(c), DomainError);
  c.histogram_window = HistogramWindow{3, 11};
  CHECK_THROWS_AS(enumerate_denominators(c), DomainError);
  c.histogram_window.reset();
  c.n_limit = std::uint64_t{1} << 50;
  CHECK_THROWS_AS(enumerate_denominators(c), ResourceError);
}

TEST_CASE("multiplicity exponent") {
  std::vector<CensusResult> fib;
  for (std::uint64_t n : {1000ull, 100000ull, 10000000ull}) {
    CensusConfig c;
    c.alphabet = Alphabet{1};
    c.n_limit = n;
    fib.push_back(enumerate_denominators(c));
  }
  auto fit = multiplicity_exponent(fib);
  CHECK(fit.slope == doctest::Approx(0.0));
  for (const auto& p : fit.points) CHECK(p.mean_multiplicity == 1.0);

  std::vector<CensusResult> twice{fib[0], fib[0]};
  CHECK_THROWS_AS(multiplicity_exponent(twice), DomainError);
  CHECK_THROWS_AS(multiplicity_exponent(std::span(fib).first(1)), DomainError);

  CensusConfig other;
  other.alphabet = Alphabet{1, 2};
  other.n_limit = 5000;
  std::vector<CensusResult> mixed{fib[0], enumerate_denominators(other)};
  CHECK_THROWS_AS(multiplicity_exponent(mixed), DomainError);
}

TEST_CASE("census file round trip and errors") {
  auto path = temp_path("fib.zcen");
  auto r = enumerate_denominators(full_config(Alphabet{1}, 10));
  save_census(r, path);
  CHECK(load_census(path) == r);

  CensusConfig c;
  c.alphabet = Alphabet{1, 3, 4};
  c.n_limit = 12345;
  auto big = enumerate_denominators(c);
  save_census(big, path);
  CHECK(load_census(path) == big);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write_bytes = [&](const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
  };
  write_bytes(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(load_census(path), CensusTruncatedError);
  write_bytes(bytes.substr(0, 2));
  CHECK_THROWS_AS(load_census(path), CensusTruncatedError);
  std::string wrong = bytes;
  wrong[0] = 'X';
  write_bytes(wrong);
  CHECK_THROWS_AS(load_census(path), CensusFormatError);
  std::string version = bytes;
  version[4] = 9;
  write_bytes(version);
  CHECK_THROWS_AS(load_census(path), CensusVersionError);
  write_bytes(bytes + "x");
  CHECK_THROWS_AS(load_census(path), CensusFormatError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_census(path), CensusFileError);
}

TEST_CASE("histogram csv") {
  auto r = enumerate_denominators(full_config(Alphabet{1}, 10));
  std::ostringstream out;
  write_histogram_csv(r, out);
  CHECK(out.str() == "d,r_d\n1,1\n2,1\n3,1\n5,1\n8,1\n");
}

TEST_CASE("checkpointed run resumes to the same result") {
  auto path = temp_path("resume.zckp");
  std::filesystem::remove(path);
  CensusConfig c;
  c.alphabet = Alphabet{1, 2, 3};
  c.n_limit = 300000;
  c.thread_count = 2;
  auto plain = enumerate_denominators(c);

  c.checkpoint_path = path;
  struct Abort {};
  std::size_t calls = 0;
  CHECK_THROWS_AS(enumerate_denominators(c,
                                         [&](std::size_t, std::size_t) {
                                           if (++calls == 3) throw Abort{};
                                         }),
                  Abort);
  CHECK(std::filesystem::exists(path));
  auto resumed = enumerate_denominators(c);
  CHECK(resumed == plain);
  // a finished checkpoint just replays
  CHECK(enumerate_denominators(c) == plain);

  CensusConfig other = c;
  other.n_limit = 1000;
  CHECK_THROWS_AS(enumerate_denominators(other), CensusFormatError);
  std::filesystem::remove(path);
}
