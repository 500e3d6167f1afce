#pragma once

// Exact integer machinery for finite continued fractions with partial
// quotients drawn from a finite alphabet: continuants, values, and the
// 2x2 matrix semigroup generated by the digit matrices.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zaremba {

using UInt128 = unsigned __int128;

std::string to_string(UInt128 value);

// Checked 128-bit arithmetic; both throw OverflowError.
UInt128 checked_add(UInt128 x, UInt128 y);
UInt128 checked_mul(UInt128 x, UInt128 y);

using Digit = std::uint32_t;

// Finite set of positive partial quotients, kept sorted.
class Alphabet {
 public:
  // Throws DomainError on an empty list, a zero digit or a duplicate.
  // Input order does not matter.
  explicit Alphabet(std::vector<Digit> digits);
  Alphabet(std::initializer_list<Digit> digits)
      : Alphabet(std::vector<Digit>(digits)) {}

  // {1, ..., max_digit}
  static Alphabet range(Digit max_digit);
  // Comma separated list, e.g. "1,2,3,4". Ranges "1-5" are accepted too.
  static Alphabet parse(std::string_view text);

  std::span<const Digit> digits() const { return digits_; }
  Digit max_digit() const { return digits_.back(); }
  Digit min_digit() const { return digits_.front(); }
  std::size_t size() const { return digits_.size(); }
  bool contains(Digit d) const;
  // a subset of b
  bool subset_of(const Alphabet& other) const;

  std::string to_string() const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<Digit> digits_;
};

// A finite digit string. The empty word is allowed.
class Word {
 public:
  Word() = default;
  // Throws DomainError if any digit is zero.
  explicit Word(std::vector<Digit> digits);
  Word(std::initializer_list<Digit> digits) : Word(std::vector<Digit>(digits)) {}
  // Throws DomainError unless every digit lies in the alphabet.
  static Word over(const Alphabet& alphabet, std::vector<Digit> digits);

  std::span<const Digit> digits() const { return digits_; }
  std::size_t size() const { return digits_.size(); }
  bool empty() const { return digits_.empty(); }
  bool is_over(const Alphabet& alphabet) const;

  Word concat(const Word& tail) const;
  Word reversed() const;

  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<Digit> digits_;
};

// Row-major 2x2 matrix with non-negative entries (a b; c d).
struct Mat2 {
  UInt128 a = 1, b = 0, c = 0, d = 1;

  static Mat2 identity() { return {}; }
  // (0 1; 1 digit), the matrix of a single partial quotient.
  static Mat2 digit(Digit d) { return {0, 1, 1, d}; }

  // +1 or -1. Throws ConsistencyError for any other determinant.
  int determinant() const;

  friend bool operator==(const Mat2&, const Mat2&) = default;
};

// Checked product; throws OverflowError.
Mat2 operator*(const Mat2& x, const Mat2& y);

std::string to_string(const Mat2& m);

struct Rational {
  UInt128 num = 0;
  UInt128 den = 1;

  friend bool operator==(const Rational&, const Rational&) = default;
};

std::string to_string(const Rational& r);

// <d_1, ..., d_k> via the three-term recurrence; the empty word gives 1.
UInt128 continuant(std::span<const Digit> digits);
inline UInt128 continuant(const Word& w) { return continuant(w.digits()); }

// [d_1, ..., d_k] = <d_2..d_k> / <d_1..d_k>. Throws DomainError on the
// empty word.
Rational cf_value(const Word& w);

// M(d_1) M(d_2) ... M(d_k); identity for the empty word. The bottom-right
// entry is the continuant, the top-right entry is <d_2..d_k>.
Mat2 word_to_matrix(const Word& w);

// (1 v; u uv+1) = M(u) M(v). Throws DomainError if u or v is outside the
// alphabet.
Mat2 pair_generator(const Alphabet& alphabet, Digit u, Digit v);

// 1 if n divides m, else 0. Throws DomainError for n == 0.
int korobov_delta(std::uint64_t n, std::int64_t m);

// (1/n) sum_{k=1..n} e(k m / n), evaluated in floating point.
double korobov_delta_exponential(std::uint64_t n, std::int64_t m);

}  // namespace zaremba
