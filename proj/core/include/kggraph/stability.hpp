#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kggraph/conserved.hpp"
#include "kggraph/evolution.hpp"
#include "kggraph/operators.hpp"
#include "kggraph/spectrum.hpp"

namespace kggraph {

enum class Verdict { OrbitallyStable, OrbitallyUnstable, LinearlyUnstable, Inconclusive };
enum class Clause { main_i_a, main_i_b, main_ii_a, main_ii_b, none };

std::string to_string(Verdict v);
std::string to_string(Clause c);

/// Space on which the indices are counted.
enum class StabilitySpace { Xk, Xeq, Full };

std::string to_string(StabilitySpace s);

struct Evidence {
  int morse_index = 0;  ///< n(L1) + n(L2) on the chosen space
  int nullity = 0;
  int slope_sign = 0;
  bool band_gap_ok = false;
};

struct StabilityVerdict {
  PhysParams params;
  Verdict verdict = Verdict::Inconclusive;
  Clause clause = Clause::none;
  Evidence evidence;
  StabilitySpace space = StabilitySpace::Full;
  /// Morse index of L1 on the whole graph.
  int full_morse_L1 = 0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  /// Smallest block eigenvalue above tol_zero.
  double smallest_positive = 0.0;
  double tol_zero = 0.0;
  SlopeRegion region = SlopeRegion::OutOfRange;
  std::string diagnostic;
};

struct ClassifyOptions {
  ProfileSource source = ProfileSource::Discrete;
  std::optional<double> tol_zero;
};

/// Space prescribed for the parameter point: X_k for k >= 1, X_eq for k = 0
/// and alpha > 0, the whole space otherwise.
StabilitySpace stability_space(const PhysParams& params);
std::optional<int> restriction_for(StabilitySpace space, const PhysParams& params);

StabilityVerdict classify(const PhysParams& params, const Grid& grid, const ClassifyOptions& options = {});

enum class PerturbationDirection { RadialSymmetric, Generic };

struct PerturbationResult {
  double max_distance = 0.0;
  /// First recorded time with distance >= 10 eps; negative when never reached.
  double first_exceed_time = -1.0;
  Trajectory trajectory;
};

/// Unit X-norm perturbation direction: inside X_k for RadialSymmetric,
/// unconstrained for Generic.  Deterministic for a given seed.
StateVector perturbation_direction(const PhysParams& params, const Grid& grid, PerturbationDirection direction,
                                   std::uint64_t seed = 7);

PerturbationResult perturbation_experiment(const PhysParams& params, const Grid& grid, double eps,
                                           PerturbationDirection direction, const EvolveConfig& cfg,
                                           std::uint64_t seed = 7);

/// Largest real part of the flow spectrum on the stability space, ignoring
/// the two eigenvalues of smallest modulus (the gauge Jordan pair at 0).
/// Above the dense cap only the real axis is searched (see
/// real_axis_instability) and 0 means no real eigenvalue above 1e-4.
double linear_growth_rate(const PhysParams& params, const Grid& grid, const FlowOptions& options = {});

struct PhaseRow {
  PhysParams params;
  std::optional<StabilityVerdict> verdict;
  std::string skipped_reason;
};

struct PhaseDiagram {
  std::vector<PhaseRow> rows;
  /// Adjacent rows whose verdict changes away from omega = +-m sqrt(p-1)/2,
  /// omega = 0, alpha = 0, or the existence boundary.
  std::vector<std::string> warnings;
};

/// Thread count from KGGRAPH_THREADS (default: hardware concurrency).
unsigned worker_threads();

PhaseDiagram phase_diagram(const std::vector<PhysParams>& sweep, const GridSpec& grid,
                           const ClassifyOptions& options = {});

}  // namespace kggraph
