#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kggraph/operators.hpp"

namespace kggraph {

struct SpectralReport {
  /// Ascending.  Complete when `complete`, otherwise the lowest part only.
  std::vector<double> eigenvalues;
  /// Mass-orthonormal eigenvectors as columns, matching `eigenvalues`; empty
  /// unless requested.
  Eigen::MatrixXd eigenvectors;
  int morse_index = 0;
  int nullity = 0;
  double tol_zero = 0.0;
  std::optional<BandEdges> band_edges;
  int dim = 0;
  bool complete = true;
};

struct SpectrumOptions {
  std::optional<double> tol_zero;  ///< default_tol_zero when empty
  int max_eigenvalues = 20;        ///< eigenvalues kept on the large-dimension path
  int dense_cap = 5000;            ///< largest dimension solved densely
  bool vectors = false;
};

/// 50 h^2 (1 + |alpha| + m^2).
double default_tol_zero(const PhysParams& params, const Grid& grid);

SpectralReport solve_spectrum(const OperatorAssembly& op, double tol_zero);
SpectralReport solve_spectrum(const OperatorAssembly& op, const SpectrumOptions& options = {});

/// Smallest `count` generalized eigenvalues of a star pencil by Sturm bisection.
std::vector<double> star_lowest_eigenvalues(const StarMatrix& A, const Eigen::VectorXd& mass, int count);

/// Number of eigenvalues in (-inf, -tol) and [-tol, tol] from exact inertia counts.
std::pair<int, int> star_inertia(const StarMatrix& A, const Eigen::VectorXd& mass, double tol);

enum class FlowMethod { Auto, Dense, RealAxis };

struct FlowOptions {
  ProfileSource source = ProfileSource::Discrete;
  std::optional<int> restrict_k;
  int dense_cap = 5000;
  /// Auto: dense when the generator fits under dense_cap, RealAxis otherwise.
  FlowMethod method = FlowMethod::Auto;
};

/// Full complex spectrum of the linearized-flow generator, sorted by real
/// part then imaginary part.
std::vector<std::complex<double>> solve_flow_spectrum(const PhysParams& params, const Grid& grid,
                                                      const FlowOptions& options = {});

/// Real positive eigenvalues of the flow generator without forming it.
///
/// G w = lambda w with lambda > 0 real holds iff
/// T(lambda) = K1 + lambda^2 M + 4 omega^2 lambda^2 M (K2 + lambda^2 M)^{-1} M
/// is singular, and T is increasing in lambda.  The number of negative
/// eigenvalues of T(lambda) therefore counts the real eigenvalues above
/// lambda; it is read off an O(dim) block-tree factorization.
struct RealAxisInstability {
  double largest = 0.0;  ///< largest real positive eigenvalue, 0 when none
  int count = 0;         ///< real eigenvalues above `floor`
  double floor = 0.0;
};

RealAxisInstability real_axis_instability(const PhysParams& params, const Grid& grid, const FlowOptions& options = {});

/// Number of negative eigenvalues of T(lambda) for given L1, L2 pencils.
int real_axis_count(const StarMatrix& K1, const StarMatrix& K2, const Eigen::VectorXd& mass, double omega,
                    double lambda);

struct SlopeEstimate {
  double slope = 0.0;
  double lambda_plus = 0.0;   ///< second restricted eigenvalue at alpha = +dalpha
  double lambda_minus = 0.0;  ///< same at alpha = -dalpha
  bool ambiguous = false;     ///< second eigenvalue not separated from its neighbours
};

/// Centered slope of the second eigenvalue of L1 on L^2_k around alpha = 0.
SlopeEstimate eigenvalue_slope_at_alpha0(const PhysParams& params, const Grid& grid, double dalpha = 1e-3,
                                         ProfileSource source = ProfileSource::Discrete);

}  // namespace kggraph
