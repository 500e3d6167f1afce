#include "zaremba/congruence.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "zaremba/errors.hpp"

namespace zaremba {

VectorSet::VectorSet(std::vector<CoprimePair> vectors) : vectors_(std::move(vectors)) {
  for (const auto& p : vectors_) {
    if (p.u == 0 || p.big_u == 0) throw DomainError("vector entries must be >= 1");
    if (std::gcd(p.u, p.big_u) != 1) {
      throw DomainError("vector (" + std::to_string(p.u) + ", " + std::to_string(p.big_u) +
                        ") is not coprime");
    }
  }
}

VectorSet VectorSet::random(std::size_t size, std::uint64_t max_entry, std::uint64_t seed) {
  if (max_entry == 0) throw DomainError("max_entry must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(1, max_entry);
  std::vector<CoprimePair> out;
  out.reserve(size);
  while (out.size() < size) {
    CoprimePair p{pick(rng), pick(rng)};
    if (std::gcd(p.u, p.big_u) == 1) out.push_back(p);
  }
  return VectorSet(std::move(out));
}

VectorSet VectorSet::reversed() const {
  return VectorSet(std::vector<CoprimePair>(vectors_.rbegin(), vectors_.rend()));
}

std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t m) {
  if (m == 0) throw DomainError("modulus must be >= 1");
  if (m == 1) return 0;
  __int128 r0 = m, r1 = a % m, s0 = 0, s1 = 1;
  while (r1 != 0) {
    __int128 t = r0 / r1;
    __int128 r2 = r0 - t * r1;
    r0 = r1;
    r1 = r2;
    __int128 s2 = s0 - t * s1;
    s0 = s1;
    s1 = s2;
  }
  if (r0 != 1) throw DomainError("no inverse: gcd(a, m) != 1");
  __int128 inv = s0 % static_cast<__int128>(m);
  if (inv < 0) inv += m;
  return static_cast<std::uint64_t>(inv);
}

std::uint64_t rq_direct(const VectorSet& xi, std::uint64_t q) {
  if (q == 0) throw DomainError("q must be >= 1");
  std::uint64_t count = 0;
  for (const auto& x : xi.vectors()) {
    const unsigned __int128 bu = x.big_u % q, u = x.u % q;
    for (const auto& y : xi.vectors()) {
      if ((bu * (y.u % q)) % q == (u * (y.big_u % q)) % q) ++count;
    }
  }
  return count;
}

std::uint64_t rq_charsum(const VectorSet& xi, std::uint64_t q) {
  if (q == 0) throw DomainError("q must be >= 1");
  // Since gcd(u, U) = 1, U v == u V (mod q) forces gcd(u, q) = gcd(v, q) = r.
  // Within a stratum, with q0 = q/r and u = r u0, the congruence is
  // t(x) == t(y) (mod q0) for t = U u0^{-1}, and the delta symbol expands as
  // (1/q0) sum_k e_{q0}(k (t(x) - t(y))), giving (1/q0) sum_k |sum_x e_{q0}(k t(x))|^2.
  std::map<std::uint64_t, std::vector<std::uint64_t>> strata;
  for (const auto& x : xi.vectors()) {
    std::uint64_t r = std::gcd(x.u, q);
    std::uint64_t q0 = q / r;
    std::uint64_t u0 = (x.u / r) % q0;
    auto t = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(x.big_u % q0) * inverse_mod(u0, q0)) % q0);
    strata[r].push_back(t);
  }
  std::uint64_t total = 0;
  for (const auto& [r, ts] : strata) {
    const std::uint64_t q0 = q / r;
    long double sum = 0.0L;
    for (std::uint64_t k = 0; k < q0; ++k) {
      std::complex<long double> s = 0.0L;
      for (std::uint64_t t : ts) {
        auto phase = static_cast<long double>((static_cast<unsigned __int128>(k) * t) % q0) / q0;
        long double angle = 2.0L * std::numbers::pi_v<long double> * phase;
        s += std::complex<long double>(std::cos(angle), std::sin(angle));
      }
      sum += std::norm(s);
    }
    long double value = sum / static_cast<long double>(q0);
    long double rounded = std::nearbyint(value);
    if (std::fabs(value - rounded) > 1e-6L) {
      throw ConsistencyError("character sum for stratum r = " + std::to_string(r) +
                             " is not an integer");
    }
    total += static_cast<std::uint64_t>(rounded);
  }
  return total;
}

}  // namespace zaremba
