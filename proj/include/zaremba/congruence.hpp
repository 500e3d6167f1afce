#pragma once

// The congruence-pair count
//   R_q = #{ ((u,U), (v,V)) in Xi x Xi : U v == u V (mod q) },
// computed by brute force and through additive characters.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace zaremba {

struct CoprimePair {
  std::uint64_t u = 1;
  std::uint64_t big_u = 1;

  friend bool operator==(const CoprimePair&, const CoprimePair&) = default;
};

class VectorSet {
 public:
  VectorSet() = default;
  // Throws DomainError for a zero entry or gcd(u, U) != 1.
  explicit VectorSet(std::vector<CoprimePair> vectors);

  // Random coprime pairs with entries in [1, max_entry].
  static VectorSet random(std::size_t size, std::uint64_t max_entry, std::uint64_t seed);

  const std::vector<CoprimePair>& vectors() const { return vectors_; }
  std::size_t size() const { return vectors_.size(); }
  VectorSet reversed() const;

 private:
  std::vector<CoprimePair> vectors_;
};

// Both throw DomainError for q = 0.
std::uint64_t rq_direct(const VectorSet& xi, std::uint64_t q);
// Throws ConsistencyError if a stratum sum is not within 1e-6 of an integer.
std::uint64_t rq_charsum(const VectorSet& xi, std::uint64_t q);

// Inverse of a modulo m (gcd(a, m) = 1, m >= 1); 0 when m = 1.
std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t m);

}  // namespace zaremba
