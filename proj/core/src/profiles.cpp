#include "kggraph/profiles.hpp"

#include <algorithm>
#include <cmath>

#include "kggraph/errors.hpp"
#include "kggraph/operators.hpp"

namespace kggraph {

namespace {

double sech2(double z) {
  const double c = std::cosh(z);
  return 1.0 / (c * c);
}

}  // namespace

ProfileSpec ProfileSpec::from(const PhysParams& params) {
  params.validate_profile();
  ProfileSpec s;
  s.params = params;
  s.kappa = std::sqrt(params.gap());
  s.amplitude = 0.5 * (params.p + 1.0) * params.gap();
  s.beta = 0.5 * (params.p - 1.0) * s.kappa;
  const double arg = params.alpha / ((2.0 * params.k - params.N) * s.kappa);
  if (!(std::abs(arg) < 1.0)) throw DomainError("artanh argument alpha/((2k-N) sqrt(m^2-omega^2)) must lie in (-1, 1)");
  s.c_k = std::atanh(arg);
  s.b0 = -2.0 * s.c_k / ((params.p - 1.0) * s.kappa);
  return s;
}

double ProfileSpec::value(int group, double x) const {
  const double shift = group == 0 ? -c_k : c_k;
  return std::pow(amplitude * sech2(beta * x + shift), 1.0 / (params.p - 1.0));
}

double ProfileSpec::derivative(int group, double x) const {
  const double shift = group == 0 ? -c_k : c_k;
  const double z = beta * x + shift;
  return -2.0 / (params.p - 1.0) * beta * std::tanh(z) * value(group, x);
}

double ProfileSpec::peak() const {
  double best = 0.0;
  for (int g = 0; g < 2; ++g) {
    if (g == 0 && params.k == 0) continue;
    const double shift = g == 0 ? -c_k : c_k;
    best = std::max(best, value(g, std::max(0.0, -shift / beta)));
  }
  return best;
}

double half_soliton(const PhysParams& params, double x) {
  const double g = params.gap();
  if (!(g > 0.0)) throw DomainError("half-soliton needs m^2 - omega^2 > 0");
  const double beta = 0.5 * (params.p - 1.0) * std::sqrt(g);
  return std::pow(0.5 * (params.p + 1.0) * g * sech2(beta * x), 1.0 / (params.p - 1.0));
}

double half_soliton_derivative(const PhysParams& params, double x) {
  const double beta = 0.5 * (params.p - 1.0) * std::sqrt(params.gap());
  return -2.0 / (params.p - 1.0) * beta * std::tanh(beta * x) * half_soliton(params, x);
}

GraphFunction build_profile(const PhysParams& params, const Grid& grid) {
  const ProfileSpec spec = ProfileSpec::from(params);
  GraphFunction phi = GraphFunction::sample(params.N, grid, [&](int edge, double x) {
    return Complex(spec.value(edge < params.k ? 0 : 1, x), 0.0);
  });
  // Both groups meet at the vertex: sech^2(-c) = sech^2(c).
  if (params.k > 0 && std::abs(spec.value(0, 0.0) - spec.value(1, 0.0)) > 1e-12 * (1.0 + spec.peak()))
    throw NumericError("profile groups disagree at the vertex");
  return phi;
}

GraphFunction discrete_profile(const PhysParams& params, const Grid& grid) {
  params.validate_profile();
  // At alpha = 0 every edge carries the same half-soliton; solving inside
  // L^2_eq avoids the Kirchhoff kernel that L^2_k would contain.
  const int k = params.alpha == 0.0 ? 0 : params.k;
  const StarLayout layout = StarLayout::symmetric(params.N, k, grid.M());
  const StarMatrix K = form_stiffness(layout, grid, params.alpha);
  const Eigen::VectorXd mass = lumped_mass(layout, grid);
  const double gap = params.gap();
  const double p = params.p;

  Eigen::VectorXd u = to_unknowns(build_profile(params, grid), layout, k).real();
  const double scale = u.cwiseAbs().maxCoeff();
  bool polishing = false;
  for (int it = 0; it < 50; ++it) {
    const Eigen::ArrayXd a = u.array().abs();
    const Eigen::ArrayXd pw = a.pow(p - 1.0);
    const Eigen::VectorXd F =
        K.apply(u) + (mass.array() * (gap * u.array() - pw * u.array())).matrix();
    const Eigen::VectorXd jac_diag = mass.array() * (gap - p * pw);
    const StarMatrix J = K.plus_diagonal(jac_diag, 1.0);
    const StarFactor fac(J, mass, 0.0);
    if (fac.had_zero_pivot()) throw NumericError("singular Jacobian while polishing the discrete profile");
    const Eigen::VectorXd du = fac.solve(F);
    u -= du;
    if (!u.allFinite()) throw NumericError("discrete profile iteration diverged");
    // Quadratic convergence: one more step after 1e-10 lands at roundoff.
    if (polishing) return from_unknowns(u, params.N, grid, layout, k);
    polishing = du.cwiseAbs().maxCoeff() <= 1e-10 * scale;
  }
  throw NumericError("discrete profile iteration did not converge");
}

GraphFunction stationary_profile(const PhysParams& params, const Grid& grid, ProfileSource source) {
  return source == ProfileSource::Analytic ? build_profile(params, grid) : discrete_profile(params, grid);
}

namespace {

struct ResidualParts {
  StarLayout layout;
  StarMatrix K;
  Eigen::VectorXd mass;
  Eigen::VectorXd weak;  ///< K u + M (gap u - |u|^{p-1} u)
};

ResidualParts residual_parts(const GraphFunction& phi, const PhysParams& params) {
  const Grid& grid = phi.grid();
  ResidualParts r{StarLayout::full(phi.N(), grid.M()), StarMatrix(StarLayout{}), {}, {}};
  r.K = form_stiffness(r.layout, grid, params.alpha);
  r.mass = lumped_mass(r.layout, grid);
  const Eigen::VectorXd u = to_unknowns(phi, r.layout).real();
  const Eigen::ArrayXd nl = u.array().abs().pow(params.p - 1.0) * u.array();
  r.weak = r.K.apply(u) + (r.mass.array() * (params.gap() * u.array() - nl)).matrix();
  return r;
}

}  // namespace

double stationary_residual(const GraphFunction& phi, const PhysParams& params) {
  const ResidualParts r = residual_parts(phi, params);
  // Dual norm sqrt(r^T G^{-1} r), G the discrete H^1 Gram matrix.
  const StarMatrix G = form_stiffness(r.layout, phi.grid(), 0.0).plus_diagonal(r.mass, 1.0);
  const StarFactor fac(G, r.mass, 0.0);
  return std::sqrt(std::max(0.0, r.weak.dot(fac.solve(r.weak))));
}

double stationary_residual_l2(const GraphFunction& phi, const PhysParams& params) {
  const ResidualParts r = residual_parts(phi, params);
  const Eigen::ArrayXd strong = r.weak.array() / r.mass.array();
  return std::sqrt((r.mass.array() * strong * strong).sum());
}

double vertex_flux_defect(const GraphFunction& phi, double alpha) {
  const double h = phi.grid().h();
  const double f0 = phi.vertex().real();
  double flux = 0.0;
  for (int j = 0; j < phi.N(); ++j) flux += (-3.0 * f0 + 4.0 * phi.at(j, 1).real() - phi.at(j, 2).real()) / (2.0 * h);
  return flux - alpha * f0;
}

GraphFunction kernel_vectors_kirchhoff(const PhysParams& params, const Grid& grid, int j) {
  if (j < 1 || j > params.N - 1) throw DomainError("kernel vector index j must lie in [1, N-1]");
  return GraphFunction::sample(params.N, grid, [&](int edge, double x) {
    if (edge == j - 1) return Complex(half_soliton_derivative(params, x), 0.0);
    if (edge == j) return Complex(-half_soliton_derivative(params, x), 0.0);
    return Complex{};
  });
}

GraphFunction symmetric_kernel_vector(const PhysParams& params, const Grid& grid, int k) {
  if (k < 1 || k > params.N - 1) throw DomainError("symmetric kernel vector needs 1 <= k <= N-1");
  const double w = static_cast<double>(params.N - k) / k;
  return GraphFunction::sample(params.N, grid, [&](int edge, double x) {
    const double d = half_soliton_derivative(params, x);
    return Complex(edge < k ? w * d : -d, 0.0);
  });
}

}  // namespace kggraph
