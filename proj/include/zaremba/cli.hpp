#pragma once

// Command dispatch and report emission for the zaremba tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace zaremba {

enum class Command { census, dimension, admissible, sigma, ensemble, rq };
enum class OutputFormat { json, csv };

std::string_view to_string(Command c);
std::string_view to_string(OutputFormat f);
std::string_view tool_version();

struct RunConfig {
  Command command = Command::census;
  std::string alphabet = "1,2";
  std::uint64_t n_limit = 1000;
  std::uint64_t q1 = 4;
  double epsilon0 = 0.0001;
  unsigned threads = 1;
  std::optional<std::string> output_path;
  OutputFormat output_format = OutputFormat::json;
  std::uint64_t seed = 1;

  // census
  std::vector<std::uint64_t> fit_limits;  // extra N values for the multiplicity fit
  std::optional<std::string> checkpoint_path;
  std::optional<std::string> save_path;
  std::optional<std::string> load_path;
  // dimension
  double width = 0.02;
  unsigned n_max = 16;
  std::optional<unsigned> depth;  // fixed word length instead of doubling
  // admissible
  std::vector<std::uint64_t> values;  // empty: every d in [1, n_limit]
  std::uint32_t q_max = 360;
  std::uint32_t residue_q = 0;  // list residue counts for q <= residue_q
  // sigma
  std::uint64_t frequencies = 200;
  double c = 0.0;
  // ensemble
  std::vector<std::size_t> lengths{2, 2};
  std::optional<std::uint64_t> m1;
  double m2 = 1.0;
  double m4 = 1.0;
  std::optional<double> delta;
  // rq
  std::uint64_t size = 20;
  std::uint64_t q = 30;
  std::uint64_t max_entry = 1000;

  nlohmann::json to_json() const;
};

// ZAREMBA_THREADS and ZAREMBA_OUTPUT fill threads / output_path when the
// corresponding flag was not given.
void apply_environment(RunConfig& config, bool threads_given, bool output_given);

// Exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitResource = 2;
inline constexpr int kExitConsistency = 3;

// Writes the report to config.output_path, or to out when unset. The
// human-readable summary goes to out when the report went to a file and to
// err otherwise; progress always goes to err.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace zaremba
