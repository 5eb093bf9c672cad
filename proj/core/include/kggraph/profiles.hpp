#pragma once

#include "kggraph/graph.hpp"
#include "kggraph/params.hpp"

namespace kggraph {

/// Closed-form data of the stationary profile phi^k.
struct ProfileSpec {
  PhysParams params;
  double kappa = 0.0;      ///< sqrt(m^2 - omega^2)
  double amplitude = 0.0;  ///< (p+1) kappa^2 / 2
  double beta = 0.0;       ///< (p-1) kappa / 2
  double c_k = 0.0;        ///< artanh(alpha / ((2k - N) kappa))
  double b0 = 0.0;         ///< bump centre -2 c_0 / ((p-1) kappa); only meaningful for k = 0

  /// Validates the existence condition; alpha = 0 yields the half-soliton.
  static ProfileSpec from(const PhysParams& params);

  /// Profile value on edge group 0 (edges 1..k, bump) or 1 (edges k+1..N, tail).
  double value(int group, double x) const;
  double derivative(int group, double x) const;
  /// Maximum of the profile over the graph.
  double peak() const;
};

/// Half-soliton [A sech^2(beta x)]^{1/(p-1)} for the parameters' (m, omega, p).
double half_soliton(const PhysParams& params, double x);
double half_soliton_derivative(const PhysParams& params, double x);

/// Closed-form profile sampled on the grid (real, positive, vertex-continuous).
GraphFunction build_profile(const PhysParams& params, const Grid& grid);

/// Exact solution of the discrete stationary equation
/// K u + M (m^2 - omega^2) u - M |u|^{p-1} u = 0 inside L^2_k, found by Newton
/// iteration started from the closed-form profile.
GraphFunction discrete_profile(const PhysParams& params, const Grid& grid);

enum class ProfileSource { Analytic, Discrete };

GraphFunction stationary_profile(const PhysParams& params, const Grid& grid, ProfileSource source);

/// Size of H_alpha phi + (m^2 - omega^2) phi - |phi|^{p-1} phi measured in the
/// dual of the discrete H^1 space (real part of phi; x = L excluded).  The
/// operator acts through its form, so the residual is a functional on E.
double stationary_residual(const GraphFunction& phi, const PhysParams& params);

/// Same residual as a nodal function in the lumped L2 norm.  The vertex row
/// of the lumped scheme is only first-order consistent, so this converges
/// like h^{3/2}.
double stationary_residual_l2(const GraphFunction& phi, const PhysParams& params);

/// sum_j phi_j'(0) - alpha phi(0) with second-order one-sided differences.
double vertex_flux_defect(const GraphFunction& phi, double alpha);

/// phi_0' on edge j, -phi_0' on edge j+1 (1-based j in [1, N-1]); phi_0 is the
/// half-soliton, so alpha is ignored.
GraphFunction kernel_vectors_kirchhoff(const PhysParams& params, const Grid& grid, int j);

/// ((N-k)/k) phi_0' on edges 1..k and -phi_0' on edges k+1..N (1 <= k <= N-1).
GraphFunction symmetric_kernel_vector(const PhysParams& params, const Grid& grid, int k);

}  // namespace kggraph
