#include "zaremba/cf_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include "zaremba/errors.hpp"

namespace zaremba {

std::string to_string(UInt128 value) {
  if (value == 0) return "0";
  std::string out;
  while (value != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

UInt128 checked_add(UInt128 x, UInt128 y) {
  UInt128 r;
  if (__builtin_add_overflow(x, y, &r)) {
    throw OverflowError("128-bit overflow in addition");
  }
  return r;
}

UInt128 checked_mul(UInt128 x, UInt128 y) {
  UInt128 r;
  if (__builtin_mul_overflow(x, y, &r)) {
    throw OverflowError("128-bit overflow in multiplication");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Alphabet

Alphabet::Alphabet(std::vector<Digit> digits) : digits_(std::move(digits)) {
  if (digits_.empty()) throw DomainError("alphabet must not be empty");
  std::sort(digits_.begin(), digits_.end());
  if (digits_.front() == 0) throw DomainError("alphabet digits must be >= 1");
  if (std::adjacent_find(digits_.begin(), digits_.end()) != digits_.end()) {
    throw DomainError("alphabet digits must be distinct");
  }
}

Alphabet Alphabet::range(Digit max_digit) {
  if (max_digit == 0) throw DomainError("alphabet range needs max_digit >= 1");
  std::vector<Digit> d(max_digit);
  std::iota(d.begin(), d.end(), Digit{1});
  return Alphabet(std::move(d));
}

namespace {

Digit parse_digit(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  Digit v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw DomainError("bad alphabet digit '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

Alphabet Alphabet::parse(std::string_view text) {
  std::vector<Digit> digits;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    if (auto dash = item.find('-'); dash != std::string_view::npos) {
      Digit lo = parse_digit(item.substr(0, dash));
      Digit hi = parse_digit(item.substr(dash + 1));
      if (lo > hi) throw DomainError("bad alphabet range '" + std::string(item) + "'");
      for (Digit d = lo; d <= hi; ++d) digits.push_back(d);
    } else {
      digits.push_back(parse_digit(item));
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return Alphabet(std::move(digits));
}

bool Alphabet::contains(Digit d) const {
  return std::binary_search(digits_.begin(), digits_.end(), d);
}

bool Alphabet::subset_of(const Alphabet& other) const {
  return std::includes(other.digits_.begin(), other.digits_.end(),
                       digits_.begin(), digits_.end());
}

std::string Alphabet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(digits_[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Word

Word::Word(std::vector<Digit> digits) : digits_(std::move(digits)) {
  if (std::find(digits_.begin(), digits_.end(), Digit{0}) != digits_.end()) {
    throw DomainError("partial quotients must be >= 1");
  }
}

Word Word::over(const Alphabet& alphabet, std::vector<Digit> digits) {
  Word w(std::move(digits));
  if (!w.is_over(alphabet)) {
    throw DomainError("word " + w.to_string() + " is not over alphabet {" +
                      alphabet.to_string() + "}");
  }
  return w;
}

bool Word::is_over(const Alphabet& alphabet) const {
  return std::all_of(digits_.begin(), digits_.end(),
                     [&](Digit d) { return alphabet.contains(d); });
}

Word Word::concat(const Word& tail) const {
  Word out = *this;
  out.digits_.insert(out.digits_.end(), tail.digits_.begin(), tail.digits_.end());
  return out;
}

Word Word::reversed() const {
  Word out = *this;
  std::reverse(out.digits_.begin(), out.digits_.end());
  return out;
}

std::string Word::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(digits_[i]);
  }
  return out + "]";
}

// ---------------------------------------------------------------------------
// Mat2

namespace {

struct Wide {
  UInt128 hi, lo;
  friend bool operator==(const Wide&, const Wide&) = default;
};

// Full 256-bit product of two 128-bit values.
Wide mul_wide(UInt128 x, UInt128 y) {
  const UInt128 mask = ~std::uint64_t{0};
  UInt128 x0 = x & mask, x1 = x >> 64, y0 = y & mask, y1 = y >> 64;
  UInt128 p00 = x0 * y0, p01 = x0 * y1, p10 = x1 * y0, p11 = x1 * y1;
  UInt128 mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
  UInt128 lo = (p00 & mask) | (mid << 64);
  UInt128 hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
  return {hi, lo};
}

Wide plus_one(Wide w) {
  ++w.lo;
  if (w.lo == 0) ++w.hi;
  return w;
}

}  // namespace

int Mat2::determinant() const {
  // ad - bc in {+1, -1}; both products may exceed 128 bits.
  Wide ad = mul_wide(a, d);
  Wide bc = mul_wide(b, c);
  if (ad == plus_one(bc)) return 1;
  if (bc == plus_one(ad)) return -1;
  throw ConsistencyError("matrix " + zaremba::to_string(*this) +
                         " has determinant other than +-1");
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {checked_add(checked_mul(x.a, y.a), checked_mul(x.b, y.c)),
          checked_add(checked_mul(x.a, y.b), checked_mul(x.b, y.d)),
          checked_add(checked_mul(x.c, y.a), checked_mul(x.d, y.c)),
          checked_add(checked_mul(x.c, y.b), checked_mul(x.d, y.d))};
}

std::string to_string(const Mat2& m) {
  return "(" + to_string(m.a) + " " + to_string(m.b) + "; " + to_string(m.c) +
         " " + to_string(m.d) + ")";
}

std::string to_string(const Rational& r) {
  return to_string(r.num) + "/" + to_string(r.den);
}

// ---------------------------------------------------------------------------
// Operations

UInt128 continuant(std::span<const Digit> digits) {
  UInt128 prev = 0;  // <> shifted: <d_1..d_{j-2}>, seeded so that <d_1> = d_1
  UInt128 cur = 1;   // <d_1..d_{j-1}>
  for (Digit d : digits) {
    UInt128 next = checked_add(checked_mul(d, cur), prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

Rational cf_value(const Word& w) {
  if (w.empty()) throw DomainError("cf_value of the empty word");
  auto digits = w.digits();
  return {continuant(digits.subspan(1)), continuant(digits)};
}

Mat2 word_to_matrix(const Word& w) {
  // Track the last two columns of the running product; M(d) shifts them.
  Mat2 m = Mat2::identity();
  for (Digit d : w.digits()) {
    m = {m.b, checked_add(m.a, checked_mul(d, m.b)), m.d,
         checked_add(m.c, checked_mul(d, m.d))};
  }
  return m;
}

Mat2 pair_generator(const Alphabet& alphabet, Digit u, Digit v) {
  if (!alphabet.contains(u) || !alphabet.contains(v)) {
    throw DomainError("pair generator digits must lie in the alphabet");
  }
  return {1, v, u, checked_add(checked_mul(u, v), 1)};
}

int korobov_delta(std::uint64_t n, std::int64_t m) {
  if (n == 0) throw DomainError("korobov_delta requires n >= 1");
  // Avoid the signed modulus of a negative m.
  std::uint64_t mag = m < 0 ? 0 - static_cast<std::uint64_t>(m)
                            : static_cast<std::uint64_t>(m);
  return mag % n == 0 ? 1 : 0;
}

double korobov_delta_exponential(std::uint64_t n, std::int64_t m) {
  if (n == 0) throw DomainError("korobov_delta requires n >= 1");
  auto nn = static_cast<std::int64_t>(n);
  std::int64_t r = ((m % nn) + nn) % nn;
  double re = 0.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    // (k*r) mod n exactly, so the phase stays in [0, 2pi).
    auto phase = static_cast<double>((static_cast<UInt128>(k) * static_cast<std::uint64_t>(r)) % n);
    re += std::cos(2.0 * std::numbers::pi * phase / static_cast<double>(n));
  }
  return re / static_cast<double>(n);
}

}  // namespace zaremba
