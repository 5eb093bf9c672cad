#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kggraph/graph.hpp"
#include "kggraph/params.hpp"

namespace kggraph {

enum class Scheme { StrangCN };
enum class Termination { Completed, BlowUp };

std::string to_string(Termination t);

struct EvolveConfig {
  double dt = 1e-3;
  double T = 1.0;
  Scheme scheme = Scheme::StrangCN;
  int record_every = 1;
  double blowup_norm = 1e6;
  /// Keep a state snapshot every this many records; 0 keeps only the first
  /// and the last state.
  int snapshot_every = 0;

  void validate() const;
  long steps() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> energy_series;
  std::vector<double> charge_series;
  std::vector<double> x_norm_series;
  /// Distance to the reference orbit; empty when no reference was given.
  std::vector<double> orbit_distance;
  std::vector<double> snapshot_times;
  std::vector<StateVector> states;
  Termination terminated = Termination::Completed;
  long steps_taken = 0;

  const StateVector& final_state() const { return states.back(); }
};

/// Crank-Nicolson step of d/dt (u, v) = (v, -(H_alpha + m^2) u) for a fixed
/// step size.  The tree factorization is computed once; instances are
/// immutable and cheap to copy.  Negative dt integrates backward.
class LinearPropagator {
 public:
  LinearPropagator(const PhysParams& params, const Grid& grid, double dt);

  StateVector apply(const StateVector& U) const;
  void apply_in_place(Eigen::VectorXcd& u, Eigen::VectorXcd& v) const;

  double dt() const { return dt_; }
  const StarLayout& layout() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double dt_;
};

StateVector step_linear(const StateVector& U, double dt, const PhysParams& params, const Grid& grid);

/// Exact flow of d/dt (u, v) = (0, |u|^{p-1} u).
StateVector step_nonlinear(const StateVector& U, double dt, const PhysParams& params);

/// One Strang step L(dt/2) N(dt) L(dt/2); `half` must be built with dt/2.
StateVector strang_step(const StateVector& U, const LinearPropagator& half, const PhysParams& params);

/// Integrates the nonlinear system.  Values at x = L are set to zero.
Trajectory evolve(const StateVector& U0, const EvolveConfig& cfg, const PhysParams& params, const Grid& grid,
                  const std::optional<StateVector>& reference = std::nullopt);

/// Largest X-norm distance between U(t) and its projection onto X_k.
double check_Xk_invariance(const StateVector& U0, const EvolveConfig& cfg, const PhysParams& params,
                           const Grid& grid, int k);

}  // namespace kggraph
