#pragma once

// Reduction of the pair-generator semigroup modulo q and the finite
// admissibility test built on it.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "zaremba/cf_core.hpp"

namespace zaremba {

// Entries (a, b, c, d) reduced mod q.
using ModMat = std::array<std::uint32_t, 4>;

struct ResidueClosure {
  std::uint32_t q = 1;
  // Identity plus every product of pair generators, sorted.
  std::vector<ModMat> matrices;
  // Bottom-right entries of the non-empty products, sorted.
  std::vector<std::uint32_t> residues;

  bool has_residue(std::uint64_t d) const;
};

// Breadth-first closure from the identity under right multiplication by the
// |A|^2 pair generators mod q. The state space is at most |SL_2(Z/q)|;
// throws ResourceError when it would exceed max_states.
ResidueClosure semigroup_closure_mod_q(const Alphabet& alphabet, std::uint32_t q,
                                       std::size_t max_states = std::size_t{1} << 24);

// Same residue set, computed from the orbit of the row vector (0, 1) instead
// of whole matrices: (0,1) g is the bottom row of g. At most q^2 states.
std::vector<std::uint32_t> residues_mod_q(const Alphabet& alphabet, std::uint32_t q);

// Thread-safe memo of residue sets keyed by (alphabet, q).
class ResidueCache {
 public:
  // Indicator vector of length q.
  std::shared_ptr<const std::vector<bool>> get(const Alphabet& alphabet, std::uint32_t q);

  static ResidueCache& global();

 private:
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const std::vector<bool>>> entries_;
};

// Smallest q in [2, q_max] with d mod q outside the residue set, if any.
std::optional<std::uint32_t> first_obstruction(std::uint64_t d, const Alphabet& alphabet,
                                               std::uint32_t q_max);

// True iff d mod q is attained for every q in [2, q_max]. This certifies
// admissibility only up to q_max. Throws DomainError for q_max < 2.
bool is_admissible(std::uint64_t d, const Alphabet& alphabet, std::uint32_t q_max = 360);

// "q,residue_count" for q in [2, q_max].
void write_residue_counts_csv(const Alphabet& alphabet, std::uint32_t q_max, std::ostream& out);
// "d,admissible,first_obstruction" (empty field when admissible).
void write_admissibility_csv(std::span<const std::uint64_t> ds, const Alphabet& alphabet,
                             std::uint32_t q_max, std::ostream& out);

}  // namespace zaremba
