#pragma once

#include <optional>
#include <string>

#include <Eigen/Sparse>

#include "kggraph/graph.hpp"
#include "kggraph/params.hpp"
#include "kggraph/profiles.hpp"
#include "kggraph/star_matrix.hpp"

namespace kggraph {

enum class OperatorKind { HAlpha, L1, L2, LBlock, Flow };

std::string to_string(OperatorKind kind);

/// Stiffness/mass pair of a quadratic form discretized with piecewise-linear
/// elements and lumped mass.  The pencil K x = lambda M x is the discrete
/// operator.  For kind == Flow the stiffness holds the (non-symmetric) flow
/// generator itself and the mass is the identity.
struct OperatorAssembly {
  OperatorKind kind = OperatorKind::HAlpha;
  PhysParams params;
  Grid grid{1.0, 8};
  StarLayout layout;
  /// Symmetry subspace the unknowns were reduced to, or -1 for the full graph.
  int restricted_k = -1;
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;

  int dim() const { return static_cast<int>(mass.size()); }
  bool is_symmetric() const { return kind != OperatorKind::Flow; }
  bool is_star() const { return layout.blocks == 1; }
};

/// Lumped L2 weights on every unknown of `layout`.
Eigen::VectorXd lumped_mass(const StarLayout& layout, const Grid& grid);

/// Form sum_c mult_c int |u_c'|^2 + alpha |u(0)|^2 on a single-block layout.
StarMatrix form_stiffness(const StarLayout& layout, const Grid& grid, double alpha);

OperatorAssembly assemble_H_alpha(const PhysParams& params, const Grid& grid);

/// L1 (which = 1) or L2 (which = 2) around the stationary profile.
OperatorAssembly assemble_L12(const PhysParams& params, const Grid& grid, int which,
                              ProfileSource source = ProfileSource::Analytic);
OperatorAssembly assemble_L12(const PhysParams& params, const Grid& grid, int which, const GraphFunction& phi);

/// Galerkin restriction of a full-graph assembly onto L^2_k (k = 0: L^2_eq).
OperatorAssembly restrict_to_Lk(const OperatorAssembly& op, int k);

/// Real 4x4 block operator on (u1, u2, v1, v2), optionally on L^2_k.
OperatorAssembly assemble_block_L(const PhysParams& params, const Grid& grid,
                                  ProfileSource source = ProfileSource::Analytic,
                                  std::optional<int> restrict_k = std::nullopt);
/// Block operator built from given L1 and L2 assemblies on a common layout.
OperatorAssembly block_from(const OperatorAssembly& L1, const OperatorAssembly& L2);

/// Generator J^{-1} M^{-1} S of the linearized flow, S the block stiffness.
OperatorAssembly assemble_flow(const PhysParams& params, const Grid& grid,
                               ProfileSource source = ProfileSource::Discrete,
                               std::optional<int> restrict_k = std::nullopt);

struct BandEdges {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  bool degenerate = false;
};

/// Roots of lambda^2 - (1 + m^2) lambda + (m^2 - omega^2).
BandEdges band_edges(const PhysParams& params);

/// mu(lambda) = lambda + lambda omega^2 / (1 - lambda).
double mu_of_lambda(double lambda, double omega);

/// Both block eigenvalues attached to an eigenvalue mu of L1 or L2 (lower <= 1 <= upper).
std::pair<double, double> block_eigenvalues_from_mu(double mu, double omega);

}  // namespace kggraph
