#pragma once

#include <string>

#include "kggraph/graph.hpp"
#include "kggraph/params.hpp"
#include "kggraph/profiles.hpp"

namespace kggraph {

/// 1/2 t_alpha(u) + m^2/2 ||u||^2 - 1/(p+1) ||u||_{p+1}^{p+1} + 1/2 ||v||^2.
/// Values at x = L are treated as zero, matching the operators.
double energy(const StateVector& U, const PhysParams& params);

/// Gradient of energy() in the real lumped L2 pairing of each component:
/// dE(U)[W] = l2_inner(G.u, W.u) + l2_inner(G.v, W.v).
StateVector energy_gradient(const StateVector& U, const PhysParams& params);

/// Im int u conj(v).
double charge(const StateVector& U);

/// energy + omega * charge.
double lyapunov(const StateVector& U, const PhysParams& params);

enum class SlopeRegion { StableSide, UnstableSide, Boundary, OutOfRange };

std::string to_string(SlopeRegion region);

struct SlopeReport {
  double Q_value = 0.0;
  double Q1 = 0.0;
  double Q2 = 0.0;
  double dQ_analytic = 0.0;
  /// Centered difference in omega; NaN when omega +- d omega leaves the
  /// existence region.
  double dQ_numeric = 0.0;
  SlopeRegion region = SlopeRegion::OutOfRange;

  int slope_sign() const { return dQ_analytic > 0 ? 1 : (dQ_analytic < 0 ? -1 : 0); }
};

/// int_a^1 (1 - t^2)^{(3-p)/(p-1)} dt.
double slope_integral(double a, double p);

/// Closed-form charge of the standing wave, its omega-derivative, and the
/// sign region of the slope.
SlopeReport slope_closed_form(const PhysParams& params, double domega = 1e-5);

/// Region of (alpha, omega) for the sign of d_omega Q, independent of any
/// numerics.
SlopeRegion slope_region(const PhysParams& params);

/// -omega ||phi||^2 on the grid.
double charge_of_profile_direct(const PhysParams& params, const Grid& grid,
                                ProfileSource source = ProfileSource::Analytic);

}  // namespace kggraph
