#include "zaremba/census.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <ostream>
#include <thread>

#include "zaremba/errors.hpp"

namespace zaremba {

HistogramWindow upper_half_window(std::uint64_t n_limit) {
  return {std::max<std::uint64_t>(1, n_limit - n_limit / 2), n_limit};
}

HistogramWindow CensusConfig::resolved_window() const {
  return histogram_window.value_or(upper_half_window(n_limit));
}

void CensusConfig::validate() const {
  if (n_limit == 0) throw DomainError("census needs N >= 1");
  if (thread_count == 0) throw DomainError("census needs at least one thread");
  auto w = resolved_window();
  if (w.lo < 1 || w.lo > w.hi || w.hi > n_limit) {
    throw DomainError("histogram window must satisfy 1 <= lo <= hi <= N");
  }
}

CensusResult::CensusResult(Alphabet alphabet, std::uint64_t n_limit, HistogramWindow window)
    : alphabet_(std::move(alphabet)),
      n_limit_(n_limit),
      window_(window),
      bits_((n_limit + 63) / 64, 0),
      counts_(window.width(), 0) {}

std::uint64_t CensusResult::cardinality() const {
  std::uint64_t n = 0;
  for (auto w : bits_) n += static_cast<std::uint64_t>(std::popcount(w));
  return n;
}

std::uint64_t CensusResult::cardinality(std::uint64_t lo, std::uint64_t hi) const {
  lo = std::max<std::uint64_t>(lo, 1);
  hi = std::min(hi, n_limit_);
  std::uint64_t n = 0;
  for (std::uint64_t d = lo; d <= hi; ++d) n += contains(d) ? 1 : 0;
  return n;
}

std::uint64_t CensusResult::multiplicity(std::uint64_t d) const {
  if (!window_.contains(d)) {
    throw DomainError("d = " + std::to_string(d) + " is outside the histogram window");
  }
  return counts_[d - window_.lo];
}

std::vector<std::uint64_t> CensusResult::missing() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 1; d <= n_limit_; ++d)
    if (!contains(d)) out.push_back(d);
  return out;
}

void CensusResult::merge(const CensusResult& shard) {
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= shard.bits_[i];
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += shard.counts_[i];
  word_count_ += shard.word_count_;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

// Continuant pair of a word: <w> and <w without its last digit>.
struct Node {
  std::uint64_t cur;
  std::uint64_t prev;
};

class Walker {
 public:
  Walker(std::span<const Digit> digits, std::uint64_t n_limit, CensusResult& shard)
      : digits_(digits), n_limit_(n_limit), shard_(shard) {}

  void subtree(std::uint64_t cur, std::uint64_t prev) {
    shard_.mark(cur);
    for (Digit a : digits_) {
      // continuants grow with the appended digit, so the first overshoot
      // prunes the remaining siblings too
      std::uint64_t next = a * cur + prev;
      if (next > n_limit_) break;
      subtree(next, cur);
    }
  }

 private:
  std::span<const Digit> digits_;
  std::uint64_t n_limit_;
  CensusResult& shard_;
};

std::uint64_t physical_memory_bytes() {
  long pages = sysconf(_SC_PHYS_PAGES);
  long page = sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page <= 0) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(pages) * static_cast<std::uint64_t>(page);
}

void check_memory(const CensusConfig& config, unsigned shards) {
  auto w = config.resolved_window();
  long double per_shard = static_cast<long double>(config.n_limit) / 8.0L +
                          8.0L * static_cast<long double>(w.width());
  long double need = per_shard * shards;
  if (config.n_limit > (std::uint64_t{1} << 40) ||
      need > 0.8L * static_cast<long double>(physical_memory_bytes())) {
    throw ResourceError("census with N = " + std::to_string(config.n_limit) + " and " +
                        std::to_string(shards) + " shards needs ~" +
                        std::to_string(static_cast<std::uint64_t>(need / 1048576.0L)) +
                        " MiB, more than available memory");
  }
  // headroom for a * cur + prev before pruning
  if (config.n_limit > std::numeric_limits<std::uint64_t>::max() /
                           (static_cast<std::uint64_t>(config.alphabet.max_digit()) + 2)) {
    throw ResourceError("N too large for 64-bit traversal state");
  }
}

// Splits the top of the tree into at least `target` disjoint subtrees. Nodes
// above the frontier are recorded in `head`.
std::vector<Node> build_frontier(const CensusConfig& config, std::size_t target,
                                 CensusResult* head) {
  std::vector<Node> frontier;
  for (Digit a : config.alphabet.digits())
    if (a <= config.n_limit) frontier.push_back({a, 1});
  while (frontier.size() < target) {
    std::vector<Node> next;
    for (const Node& n : frontier)
      for (Digit a : config.alphabet.digits()) {
        std::uint64_t c = a * n.cur + n.prev;
        if (c > config.n_limit) break;
        next.push_back({c, n.cur});
      }
    if (next.empty()) break;
    if (head)
      for (const Node& n : frontier) head->mark(n.cur);
    frontier = std::move(next);
  }
  return frontier;
}

// Checkpoint: "ZCKP", version, frontier target, total subtrees, subtrees done,
// followed by the partial census in ZCEN form.
constexpr char kCheckpointMagic[4] = {'Z', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

bool get_bytes(std::istream& in, void* dst, std::size_t n) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!get_bytes(in, b, 4)) throw CensusTruncatedError("census file truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!get_bytes(in, b, 8)) throw CensusTruncatedError("census file truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

struct Checkpoint {
  std::uint64_t target = 0;
  std::uint64_t total = 0;
  std::uint64_t done = 0;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp,
                      const CensusResult& partial) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write checkpoint " + tmp.string());
    out.write(kCheckpointMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u64(out, cp.target);
    put_u64(out, cp.total);
    put_u64(out, cp.done);
    write_census(partial, out);
    if (!out) throw ResourceError("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<std::pair<Checkpoint, CensusResult>> read_checkpoint(
    const std::filesystem::path& path, const CensusConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  if (!get_bytes(in, magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw CensusFormatError("not a census checkpoint: " + path.string());
  }
  if (get_u32(in) != kCheckpointVersion) {
    throw CensusVersionError("unsupported checkpoint version in " + path.string());
  }
  Checkpoint cp;
  cp.target = get_u64(in);
  cp.total = get_u64(in);
  cp.done = get_u64(in);
  CensusResult partial = read_census(in);
  if (partial.alphabet() != config.alphabet || partial.n_limit() != config.n_limit ||
      partial.window() != config.resolved_window() || cp.done > cp.total) {
    throw CensusFormatError("checkpoint " + path.string() + " belongs to a different run");
  }
  return std::make_pair(cp, std::move(partial));
}

}  // namespace

CensusResult enumerate_denominators(const CensusConfig& config, const CensusProgress& progress) {
  config.validate();
  const unsigned threads = config.thread_count;
  check_memory(config, threads + 1);
  const auto window = config.resolved_window();

  try {
    CensusResult total(config.alphabet, config.n_limit, window);
    Checkpoint cp;
    cp.target = 8 * static_cast<std::uint64_t>(threads);
    bool resumed = false;
    if (config.checkpoint_path) {
      if (auto loaded = read_checkpoint(*config.checkpoint_path, config)) {
        cp = loaded->first;
        total = std::move(loaded->second);
        resumed = true;
      }
    }
    // The frontier depends only on the target, so a resumed run rebuilds
    // the same subtree list.
    CensusResult head(config.alphabet, config.n_limit, window);
    std::vector<Node> frontier = build_frontier(config, cp.target, &head);
    if (resumed) {
      if (cp.total != frontier.size()) {
        throw CensusFormatError("checkpoint subtree count does not match this run");
      }
    } else {
      total.merge(head);
      cp.total = frontier.size();
      cp.done = 0;
    }

    // Subtrees are processed in batches; a batch is merged (and optionally
    // checkpointed) before the next one starts.
    const std::size_t batch = config.checkpoint_path
                                  ? std::max<std::size_t>(threads, frontier.size() / 16 + 1)
                                  : frontier.size();
    std::vector<CensusResult> shards;
    shards.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) shards.emplace_back(config.alphabet, config.n_limit, window);

    while (cp.done < frontier.size()) {
      const std::size_t begin = cp.done;
      const std::size_t end = std::min(frontier.size(), begin + batch);
      std::atomic<std::size_t> next{begin};
      auto work = [&](unsigned t) {
        Walker walker(config.alphabet.digits(), config.n_limit, shards[t]);
        for (std::size_t i = next.fetch_add(1); i < end; i = next.fetch_add(1)) {
          walker.subtree(frontier[i].cur, frontier[i].prev);
        }
      };
      if (threads == 1) {
        work(0);
      } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
      }
      for (auto& s : shards) {
        total.merge(s);
        s = CensusResult(config.alphabet, config.n_limit, window);
      }
      cp.done = end;
      if (config.checkpoint_path) write_checkpoint(*config.checkpoint_path, cp, total);
      if (progress) progress(cp.done, frontier.size());
    }
    return total;
  } catch (const std::bad_alloc&) {
    throw ResourceError("out of memory during census with N = " + std::to_string(config.n_limit));
  }
}

double proportion(const CensusResult& result) {
  return static_cast<double>(result.cardinality()) / static_cast<double>(result.n_limit());
}

double mean_upper_half_multiplicity(const CensusResult& result) {
  auto half = upper_half_window(result.n_limit());
  const auto& w = result.window();
  if (w.lo > half.lo || w.hi < half.hi) {
    throw DomainError("histogram window does not cover [N/2, N]");
  }
  std::uint64_t words = 0, distinct = 0;
  for (std::uint64_t d = half.lo; d <= half.hi; ++d) {
    std::uint64_t r = result.multiplicity(d);
    words += r;
    distinct += r > 0 ? 1 : 0;
  }
  if (distinct == 0) throw DomainError("no denominators in [N/2, N]");
  return static_cast<double>(words) / static_cast<double>(distinct);
}

MultiplicityFit multiplicity_exponent(std::span<const CensusResult> results) {
  if (results.size() < 2) throw DomainError("multiplicity fit needs at least two census results");
  MultiplicityFit fit;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].alphabet() != results[0].alphabet()) {
      throw DomainError("multiplicity fit needs a single alphabet");
    }
    for (std::size_t j = 0; j < i; ++j)
      if (results[j].n_limit() == results[i].n_limit()) {
        throw DomainError("multiplicity fit needs pairwise distinct N");
      }
    fit.points.push_back({results[i].n_limit(), mean_upper_half_multiplicity(results[i])});
  }
  const double n = static_cast<double>(fit.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : fit.points) {
    double x = std::log(static_cast<double>(p.n_limit));
    double y = std::log(p.mean_multiplicity);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (const auto& p : fit.points) {
    double r = std::log(p.mean_multiplicity) -
               (fit.intercept + fit.slope * std::log(static_cast<double>(p.n_limit)));
    fit.residuals.push_back(r);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

// ---------------------------------------------------------------------------
// File format

namespace {
constexpr char kCensusMagic[4] = {'Z', 'C', 'E', 'N'};
constexpr std::uint32_t kCensusVersion = 1;
}  // namespace

void write_census(const CensusResult& result, std::ostream& out) {
  out.write(kCensusMagic, 4);
  put_u32(out, kCensusVersion);
  put_u64(out, result.n_limit());
  auto digits = result.alphabet().digits();
  put_u32(out, static_cast<std::uint32_t>(digits.size()));
  for (Digit d : digits) put_u32(out, d);
  put_u64(out, result.window().lo);
  put_u64(out, result.window().hi);
  put_u64(out, result.word_count());
  auto bits = result.bit_words();
  put_u64(out, bits.size());
  for (auto w : bits) put_u64(out, w);
  auto hist = result.histogram();
  std::uint64_t pairs = 0;
  for (auto c : hist) pairs += c > 0 ? 1 : 0;
  put_u64(out, pairs);
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (hist[i] == 0) continue;
    put_u64(out, result.window().lo + i);
    put_u64(out, hist[i]);
  }
}

CensusResult read_census(std::istream& in) {
  char magic[4];
  if (!get_bytes(in, magic, 4)) throw CensusTruncatedError("census file truncated");
  if (std::memcmp(magic, kCensusMagic, 4) != 0) throw CensusFormatError("bad census magic");
  if (std::uint32_t v = get_u32(in); v != kCensusVersion) {
    throw CensusVersionError("unsupported census version " + std::to_string(v));
  }
  std::uint64_t n_limit = get_u64(in);
  std::uint32_t ndigits = get_u32(in);
  if (n_limit == 0 || ndigits == 0 || ndigits > (1U << 20)) {
    throw CensusFormatError("corrupt census header");
  }
  std::vector<Digit> digits(ndigits);
  for (auto& d : digits) d = get_u32(in);
  HistogramWindow window;
  window.lo = get_u64(in);
  window.hi = get_u64(in);
  std::uint64_t words = get_u64(in);
  std::uint64_t nbits = get_u64(in);
  if (window.lo < 1 || window.lo > window.hi || window.hi > n_limit ||
      nbits != (n_limit + 63) / 64) {
    throw CensusFormatError("corrupt census header");
  }
  std::optional<CensusResult> result;
  try {
    result.emplace(Alphabet(std::move(digits)), n_limit, window);
  } catch (const DomainError& e) {
    throw CensusFormatError(std::string("corrupt census alphabet: ") + e.what());
  }
  for (auto& w : result->mutable_bit_words()) w = get_u64(in);
  std::uint64_t pairs = get_u64(in);
  if (pairs > window.width()) throw CensusFormatError("corrupt census histogram size");
  auto hist = result->mutable_histogram();
  for (std::uint64_t i = 0; i < pairs; ++i) {
    std::uint64_t d = get_u64(in);
    std::uint64_t c = get_u64(in);
    if (!window.contains(d)) throw CensusFormatError("histogram entry outside window");
    hist[d - window.lo] = c;
  }
  result->set_word_count(words);
  return std::move(*result);
}

void save_census(const CensusResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot open " + path.string() + " for writing");
  write_census(result, out);
  if (!out) throw ResourceError("write failed: " + path.string());
}

CensusResult load_census(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CensusFileError("cannot open " + path.string());
  CensusResult result = read_census(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CensusFormatError("trailing bytes after census payload");
  }
  return result;
}

void write_histogram_csv(const CensusResult& result, std::ostream& out) {
  out << "d,r_d\n";
  auto hist = result.histogram();
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (hist[i] == 0) continue;
    out << result.window().lo + i << ',' << hist[i] << '\n';
  }
}

}  // namespace zaremba
