#include "zaremba/modular.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <unordered_set>

#include "zaremba/errors.hpp"

namespace zaremba {

bool ResidueClosure::has_residue(std::uint64_t d) const {
  return std::binary_search(residues.begin(), residues.end(),
                            static_cast<std::uint32_t>(d % q));
}

namespace {

struct Generator {
  std::uint64_t u, v, uv1;  // (1 v; u uv+1) reduced mod q
};

std::vector<Generator> generators_mod(const Alphabet& alphabet, std::uint32_t q) {
  std::vector<Generator> gens;
  for (Digit u : alphabet.digits())
    for (Digit v : alphabet.digits()) {
      std::uint64_t uu = u % q, vv = v % q;
      gens.push_back({uu, vv, (uu * vv + 1) % q});
    }
  return gens;
}

std::uint64_t key(const ModMat& m) {
  return (std::uint64_t{m[0]} << 48) | (std::uint64_t{m[1]} << 32) |
         (std::uint64_t{m[2]} << 16) | m[3];
}

}  // namespace

ResidueClosure semigroup_closure_mod_q(const Alphabet& alphabet, std::uint32_t q,
                                       std::size_t max_states) {
  if (q == 0) throw DomainError("modulus must be >= 1");
  if (q > 65535) throw ResourceError("matrix closure is limited to q < 65536");
  const auto gens = generators_mod(alphabet, q);
  const ModMat identity{1 % q, 0, 0, 1 % q};

  ResidueClosure out;
  out.q = q;
  std::unordered_set<std::uint64_t> seen{key(identity)};
  std::vector<bool> residue(q, false);
  std::deque<ModMat> queue{identity};
  out.matrices.push_back(identity);
  while (!queue.empty()) {
    ModMat m = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      // m * (1 v; u uv+1)
      ModMat p{static_cast<std::uint32_t>((m[0] + m[1] * g.u) % q),
               static_cast<std::uint32_t>((m[0] * g.v + m[1] * g.uv1) % q),
               static_cast<std::uint32_t>((m[2] + m[3] * g.u) % q),
               static_cast<std::uint32_t>((m[2] * g.v + m[3] * g.uv1) % q)};
      // every product is non-empty, including one that lands on the identity
      residue[p[3]] = true;
      if (seen.insert(key(p)).second) {
        if (seen.size() > max_states) {
          throw ResourceError("semigroup closure mod " + std::to_string(q) + " exceeds " +
                              std::to_string(max_states) + " states");
        }
        out.matrices.push_back(p);
        queue.push_back(p);
      }
    }
  }
  std::sort(out.matrices.begin(), out.matrices.end());
  for (std::uint32_t r = 0; r < q; ++r)
    if (residue[r]) out.residues.push_back(r);
  return out;
}

std::vector<std::uint32_t> residues_mod_q(const Alphabet& alphabet, std::uint32_t q) {
  if (q == 0) throw DomainError("modulus must be >= 1");
  const auto gens = generators_mod(alphabet, q);
  const std::uint64_t qq = q;
  // (c, d) -> c * q + d
  std::vector<bool> seen(qq * qq, false);
  std::vector<std::uint64_t> stack;
  auto visit = [&](std::uint64_t c, std::uint64_t d) {
    std::uint64_t k = c * qq + d;
    if (!seen[k]) {
      seen[k] = true;
      stack.push_back(k);
    }
  };
  for (const auto& g : gens) visit(g.u, g.uv1);  // (0,1) * generator
  while (!stack.empty()) {
    std::uint64_t k = stack.back();
    stack.pop_back();
    std::uint64_t c = k / qq, d = k % qq;
    for (const auto& g : gens) visit((c + d * g.u) % qq, (c * g.v + d * g.uv1) % qq);
  }
  std::vector<bool> residue(q, false);
  for (std::uint64_t k = 0; k < seen.size(); ++k)
    if (seen[k]) residue[k % qq] = true;
  std::vector<std::uint32_t> out;
  for (std::uint32_t r = 0; r < q; ++r)
    if (residue[r]) out.push_back(r);
  return out;
}

std::shared_ptr<const std::vector<bool>> ResidueCache::get(const Alphabet& alphabet,
                                                           std::uint32_t q) {
  std::string k = alphabet.to_string() + "|" + std::to_string(q);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(k); it != entries_.end()) return it->second;
  }
  auto indicator = std::make_shared<std::vector<bool>>(q, false);
  for (auto r : residues_mod_q(alphabet, q)) (*indicator)[r] = true;
  std::lock_guard lock(mutex_);
  return entries_.try_emplace(k, std::move(indicator)).first->second;
}

ResidueCache& ResidueCache::global() {
  static ResidueCache cache;
  return cache;
}

std::optional<std::uint32_t> first_obstruction(std::uint64_t d, const Alphabet& alphabet,
                                               std::uint32_t q_max) {
  if (q_max < 2) throw DomainError("admissibility needs q_max >= 2");
  auto& cache = ResidueCache::global();
  for (std::uint32_t q = 2; q <= q_max; ++q) {
    if (!(*cache.get(alphabet, q))[d % q]) return q;
  }
  return std::nullopt;
}

bool is_admissible(std::uint64_t d, const Alphabet& alphabet, std::uint32_t q_max) {
  return !first_obstruction(d, alphabet, q_max).has_value();
}

void write_residue_counts_csv(const Alphabet& alphabet, std::uint32_t q_max, std::ostream& out) {
  out << "q,residue_count\n";
  auto& cache = ResidueCache::global();
  for (std::uint32_t q = 2; q <= q_max; ++q) {
    auto ind = cache.get(alphabet, q);
    out << q << ',' << std::count(ind->begin(), ind->end(), true) << '\n';
  }
}

void write_admissibility_csv(std::span<const std::uint64_t> ds, const Alphabet& alphabet,
                             std::uint32_t q_max, std::ostream& out) {
  out << "d,admissible,first_obstruction\n";
  for (auto d : ds) {
    auto obstruction = first_obstruction(d, alphabet, q_max);
    out << d << ',' << (obstruction ? "false" : "true") << ',';
    if (obstruction) out << *obstruction;
    out << '\n';
  }
}

}  // namespace zaremba
