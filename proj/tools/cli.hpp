#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kggraph/errors.hpp"
#include "kggraph/evolution.hpp"
#include "kggraph/params.hpp"
#include "kggraph/stability.hpp"

namespace kggraph::cli {

enum class Command { Profile, Spectrum, Slope, Evolve, Classify, PhaseDiagram, Accept };
enum class Format { Csv, Json };

std::string to_string(Command c);
Command command_from(const std::string& name);

/// Bad flag, unreadable file or invalid combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

namespace exit_code {
constexpr int ok = 0;
constexpr int validation = 2;
constexpr int numeric = 3;
constexpr int acceptance = 4;
}  // namespace exit_code

struct RunConfig {
  Command command = Command::Classify;
  PhysParams params;
  Grid grid{60.0, 6000};
  /// Edge length when given explicitly; sweep points otherwise get their own.
  std::optional<double> length;
  std::optional<EvolveConfig> evolve_cfg;
  /// Empty: data goes to standard output.
  std::string output_path;
  Format format = Format::Csv;

  /// spectrum: H, L1, L2 or block.
  std::string which = "L1";
  /// spectrum: restrict to L2_k for this k.
  std::optional<int> restrict_k;
  /// evolve: perturbation size added to the standing wave.
  double eps = 0.0;
  std::string sweep_file;
};

/// Flags override values from --config.  Throws UsageError or DomainError.
RunConfig parse_config(const std::vector<std::string>& args);

/// Executes the command; the data goes to output_path (or `out`) and a
/// one-line summary to `out` (or `err` when the data went to `out`).
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_config + run with errors mapped to exit codes.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Sweep points from CSV (header with any of N,k,alpha,m,omega,p; missing
/// columns take the values of `base`) or from a JSON array of objects.
std::vector<PhysParams> read_sweep(const std::string& path, const PhysParams& base);

}  // namespace kggraph::cli
