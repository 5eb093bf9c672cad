#include "kggraph/conserved.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "kggraph/errors.hpp"
#include "kggraph/operators.hpp"

namespace kggraph {

namespace {

struct Unknowns {
  StarLayout layout;
  StarMatrix K;
  Eigen::VectorXd mass;

  Unknowns(const PhysParams& params, const Grid& grid)
      : layout(StarLayout::full(params.N, grid.M())),
        K(form_stiffness(layout, grid, params.alpha)),
        mass(lumped_mass(layout, grid)) {}
};

}  // namespace

double energy(const StateVector& U, const PhysParams& params) {
  const Unknowns d(params, U.u.grid());
  const Eigen::VectorXcd u = to_unknowns(U.u, d.layout);
  const Eigen::VectorXcd v = to_unknowns(U.v, d.layout);
  const double kinetic = u.dot(d.K.apply(u)).real();
  const Eigen::ArrayXd au2 = u.array().abs2();
  const double mass_term = (d.mass.array() * au2).sum();
  const double nonlinear = (d.mass.array() * au2.pow(0.5 * (params.p + 1.0))).sum();
  const double v2 = (d.mass.array() * v.array().abs2()).sum();
  const double m2 = params.m * params.m;
  return 0.5 * kinetic + 0.5 * m2 * mass_term - nonlinear / (params.p + 1.0) + 0.5 * v2;
}

StateVector energy_gradient(const StateVector& U, const PhysParams& params) {
  const Grid& grid = U.u.grid();
  const Unknowns d(params, grid);
  const Eigen::VectorXcd u = to_unknowns(U.u, d.layout);
  const Eigen::VectorXcd v = to_unknowns(U.v, d.layout);
  const Eigen::ArrayXcd pw = u.array().abs().pow(params.p - 1.0).cast<Complex>();
  const Eigen::VectorXcd gu = (d.K.apply(u).array() / d.mass.array().cast<Complex>() +
                               params.m * params.m * u.array() - pw * u.array())
                                  .matrix();
  return {from_unknowns(gu, params.N, grid, d.layout), from_unknowns(v, params.N, grid, d.layout)};
}

double charge(const StateVector& U) { return l2_pairing(U.u, U.v).imag(); }

double lyapunov(const StateVector& U, const PhysParams& params) {
  return energy(U, params) + params.omega * charge(U);
}

std::string to_string(SlopeRegion region) {
  switch (region) {
    case SlopeRegion::StableSide: return "StableSide";
    case SlopeRegion::UnstableSide: return "UnstableSide";
    case SlopeRegion::Boundary: return "Boundary";
    case SlopeRegion::OutOfRange: return "OutOfRange";
  }
  return "unknown";
}

double slope_integral(double a, double p) {
  if (!(a > -1.0 && a < 1.0)) throw DomainError("slope integral needs -1 < a < 1");
  // t = sin(theta) turns the integrand into cos^r(theta), r = (5-p)/(p-1).
  // Measuring from the top endpoint, phi = pi/2 - theta = Phi s^n makes the
  // endpoint behaviour s^{n(r+1)-1}, smooth enough for Gauss-Legendre.
  const double r = (5.0 - p) / (p - 1.0);
  const double top = 0.5 * std::numbers::pi - std::asin(a);
  const int n = std::max(4, static_cast<int>(std::ceil(p - 1.0)));
  auto f = [&](double s) {
    const double sn1 = std::pow(s, n - 1);
    return std::pow(std::sin(top * sn1 * s), r) * n * top * sn1;
  };
  return boost::math::quadrature::gauss<double, 64>::integrate(f, 0.0, 1.0);
}

SlopeRegion slope_region(const PhysParams& params) {
  if (!(params.p > 1.0 && params.p < 5.0)) return SlopeRegion::OutOfRange;
  const double w = std::abs(params.omega);
  const double edge = params.m * std::sqrt(params.p - 1.0) / 2.0;
  if (params.alpha == 0.0 || w == 0.0 || w == edge) return SlopeRegion::Boundary;
  if (params.alpha < 0.0 && w > edge && w < params.m) return SlopeRegion::StableSide;
  if (params.alpha > 0.0 && w < edge) return SlopeRegion::UnstableSide;
  return SlopeRegion::OutOfRange;
}

namespace {

struct ChargeParts {
  double Q1, Q2;
};

ChargeParts charge_parts(const PhysParams& params) {
  const double p = params.p;
  const double g = params.gap();
  const double kappa = std::sqrt(g);
  const double s = params.alpha / ((2.0 * params.k - params.N) * kappa);
  const double lead = std::pow(0.5 * (p + 1.0), 2.0 / (p - 1.0));
  ChargeParts c;
  c.Q1 = -2.0 * params.omega * lead * std::pow(g, (5.0 - p) / (2.0 * (p - 1.0))) / (p - 1.0);
  c.Q2 = (params.k > 0 ? params.k * slope_integral(-s, p) : 0.0) + (params.N - params.k) * slope_integral(s, p);
  return c;
}

}  // namespace

SlopeReport slope_closed_form(const PhysParams& params, double domega) {
  params.validate_profile();
  const double p = params.p;
  const double w = params.omega;
  const double g = params.gap();
  const double m2 = params.m * params.m;
  const double nk = 2.0 * params.k - params.N;

  SlopeReport r;
  const ChargeParts c = charge_parts(params);
  r.Q1 = c.Q1;
  r.Q2 = c.Q2;
  r.Q_value = c.Q1 * c.Q2;

  const double lead = std::pow(0.5 * (p + 1.0), 2.0 / (p - 1.0));
  const double dQ1 = 2.0 / (p - 1.0) * lead * std::pow(g, (7.0 - 3.0 * p) / (2.0 * (p - 1.0))) *
                     (4.0 * w * w / (p - 1.0) - m2);
  const double dQ2 = std::pow(1.0 - params.alpha * params.alpha / (nk * nk * g), (3.0 - p) / (p - 1.0)) *
                     params.alpha * w / std::pow(g, 1.5);
  r.dQ_analytic = dQ1 * c.Q2 + c.Q1 * dQ2;

  PhysParams lo = params, hi = params;
  lo.omega = w - domega;
  hi.omega = w + domega;
  if (lo.profile_exists() && hi.profile_exists()) {
    const ChargeParts a = charge_parts(lo);
    const ChargeParts b = charge_parts(hi);
    r.dQ_numeric = (b.Q1 * b.Q2 - a.Q1 * a.Q2) / (2.0 * domega);
  } else {
    r.dQ_numeric = std::numeric_limits<double>::quiet_NaN();
  }
  r.region = slope_region(params);
  return r;
}

double charge_of_profile_direct(const PhysParams& params, const Grid& grid, ProfileSource source) {
  const GraphFunction phi = stationary_profile(params, grid, source);
  return -params.omega * l2_inner(phi, phi);
}

}  // namespace kggraph
