#include "kggraph/evolution.hpp"

#include <cmath>

#include "kggraph/errors.hpp"
#include "kggraph/operators.hpp"

namespace kggraph {

std::string to_string(Termination t) { return t == Termination::Completed ? "Completed" : "BlowUp"; }

void EvolveConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(T >= dt)) throw DomainError("T must be at least dt");
  if (record_every < 1) throw DomainError("record_every must be at least 1");
  if (!(blowup_norm > 0.0)) throw DomainError("blowup_norm must be positive");
  if (snapshot_every < 0) throw DomainError("snapshot_every must be non-negative");
}

long EvolveConfig::steps() const { return static_cast<long>(std::ceil(T / dt - 1e-9)); }

struct LinearPropagator::Impl {
  StarLayout layout;
  StarMatrix A;    // K + m^2 M
  StarMatrix lhs;  // M + dt^2/4 A
  Eigen::VectorXd mass;
  std::unique_ptr<StarFactor> factor;

  Impl(const PhysParams& params, const Grid& grid, double dt)
      : layout(StarLayout::full(params.N, grid.M())),
        A(form_stiffness(layout, grid, params.alpha)),
        lhs(layout),
        mass(lumped_mass(layout, grid)) {
    A = A.plus_diagonal(mass, params.m * params.m);
    const double c = 0.25 * dt * dt;
    lhs.vertex_diag = c * A.vertex_diag + mass[0];
    for (size_t o = 0; o < A.diag.size(); ++o) {
      lhs.diag[o] = c * A.diag[o] + mass[static_cast<Eigen::Index>(o + 1)];
      lhs.off[o] = c * A.off[o];
    }
    factor = std::make_unique<StarFactor>(lhs, Eigen::VectorXd::Zero(mass.size()), 0.0);
    if (factor->had_zero_pivot() || factor->negative_pivots() > 0)
      throw NumericError("Crank-Nicolson matrix is not positive definite");
  }
};

LinearPropagator::LinearPropagator(const PhysParams& params, const Grid& grid, double dt)
    : impl_(std::make_shared<const Impl>(params, grid, dt)), dt_(dt) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw DomainError("time step must be finite and nonzero");
}

const StarLayout& LinearPropagator::layout() const { return impl_->layout; }

void LinearPropagator::apply_in_place(Eigen::VectorXcd& u, Eigen::VectorXcd& v) const {
  const Impl& d = *impl_;
  const double c = 0.25 * dt_ * dt_;
  const Eigen::VectorXcd Au = d.A.apply(u);
  const Eigen::VectorXcd rhs = (d.mass.cast<Complex>().array() * (u + dt_ * v).array()).matrix() - c * Au;
  const Eigen::VectorXcd un = d.factor->solve(rhs);
  const Eigen::VectorXcd Aun = d.A.apply(un);
  v -= (0.5 * dt_) * ((Au + Aun).array() / d.mass.cast<Complex>().array()).matrix();
  u = un;
}

StateVector LinearPropagator::apply(const StateVector& U) const {
  const int N = U.u.N();
  const Grid& grid = U.u.grid();
  Eigen::VectorXcd u = to_unknowns(U.u, layout());
  Eigen::VectorXcd v = to_unknowns(U.v, layout());
  if (u.size() != layout().dim()) throw DimensionError("state does not match the propagator grid");
  apply_in_place(u, v);
  return {from_unknowns(u, N, grid, layout()), from_unknowns(v, N, grid, layout())};
}

StateVector step_linear(const StateVector& U, double dt, const PhysParams& params, const Grid& grid) {
  return LinearPropagator(params, grid, dt).apply(U);
}

namespace {

void nonlinear_kick(const Eigen::VectorXcd& u, Eigen::VectorXcd& v, double dt, double p) {
  for (Eigen::Index i = 0; i < u.size(); ++i) v[i] += dt * std::pow(std::abs(u[i]), p - 1.0) * u[i];
}

GraphFunction kick(const GraphFunction& u, const GraphFunction& v, double dt, double p) {
  GraphFunction out = v;
  auto f = [&](Complex z) { return dt * std::pow(std::abs(z), p - 1.0) * z; };
  out.set_vertex(out.vertex() + f(u.vertex()));
  for (int j = 0; j < u.N(); ++j)
    for (int i = 1; i <= u.grid().M(); ++i) out.at(j, i) += f(u.at(j, i));
  return out;
}

/// X-norm and energy evaluated directly on unknown vectors.
struct Metric {
  StarMatrix K0;  // derivative form, alpha = 0
  StarMatrix Ka;  // t_alpha
  Eigen::VectorXd mass;
  double m2, p;

  Metric(const PhysParams& params, const Grid& grid, const StarLayout& layout)
      : K0(form_stiffness(layout, grid, 0.0)),
        Ka(form_stiffness(layout, grid, params.alpha)),
        mass(lumped_mass(layout, grid)),
        m2(params.m * params.m),
        p(params.p) {}

  Complex pairing(const Eigen::VectorXcd& u1, const Eigen::VectorXcd& v1, const Eigen::VectorXcd& u2,
                  const Eigen::VectorXcd& v2) const {
    // Sum of w a conj(b): Eigen's dot conjugates the first argument.
    const Eigen::VectorXcd Mu = mass.cast<Complex>().cwiseProduct(u1) + K0.apply(u1);
    const Eigen::VectorXcd Mv = mass.cast<Complex>().cwiseProduct(v1);
    return u2.dot(Mu) + v2.dot(Mv);
  }
  double norm(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
    return std::sqrt(std::max(0.0, pairing(u, v, u, v).real()));
  }
  double energy(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
    const Eigen::ArrayXd a2 = u.array().abs2();
    return 0.5 * u.dot(Ka.apply(u)).real() + 0.5 * m2 * (mass.array() * a2).sum() -
           (mass.array() * a2.pow(0.5 * (p + 1.0))).sum() / (p + 1.0) +
           0.5 * (mass.array() * v.array().abs2()).sum();
  }
  double charge(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
    return v.dot(mass.cast<Complex>().cwiseProduct(u)).imag();
  }
};

void project_chains(Eigen::VectorXcd& x, const StarLayout& layout, int k) {
  const int N = layout.chains;
  auto average = [&](int first, int last) {
    for (int i = 0; i < layout.nodes; ++i) {
      Complex s{};
      for (int j = first; j < last; ++j) s += x[layout.node(j, i)];
      s /= static_cast<double>(last - first);
      for (int j = first; j < last; ++j) x[layout.node(j, i)] = s;
    }
  };
  if (k == 0) {
    average(0, N);
  } else {
    average(0, k);
    average(k, N);
  }
}

bool finite(const Eigen::VectorXcd& x) { return x.array().isFinite().all(); }

}  // namespace

StateVector step_nonlinear(const StateVector& U, double dt, const PhysParams& params) {
  return {U.u, kick(U.u, U.v, dt, params.p)};
}

StateVector strang_step(const StateVector& U, const LinearPropagator& half, const PhysParams& params) {
  StateVector a = half.apply(U);
  a = step_nonlinear(a, 2.0 * half.dt(), params);
  return half.apply(a);
}

Trajectory evolve(const StateVector& U0, const EvolveConfig& cfg, const PhysParams& params, const Grid& grid,
                  const std::optional<StateVector>& reference) {
  cfg.validate();
  params.validate();
  if (U0.u.N() != params.N || !(U0.u.grid() == grid)) throw DimensionError("initial state does not match grid");
  const LinearPropagator half(params, grid, 0.5 * cfg.dt);
  const StarLayout& layout = half.layout();
  const Metric metric(params, grid, layout);

  Eigen::VectorXcd u = to_unknowns(U0.u, layout);
  Eigen::VectorXcd v = to_unknowns(U0.v, layout);
  Eigen::VectorXcd ru, rv;
  if (reference) {
    ru = to_unknowns(reference->u, layout);
    rv = to_unknowns(reference->v, layout);
  }

  Trajectory tr;
  auto snapshot = [&](double t) {
    tr.snapshot_times.push_back(t);
    tr.states.emplace_back(from_unknowns(u, params.N, grid, layout), from_unknowns(v, params.N, grid, layout));
  };
  auto record = [&](double t, double xn) {
    tr.times.push_back(t);
    tr.energy_series.push_back(metric.energy(u, v));
    tr.charge_series.push_back(metric.charge(u, v));
    tr.x_norm_series.push_back(xn);
    if (reference) {
      const Complex c = metric.pairing(u, v, ru, rv);
      const Complex rot = std::abs(c) > 0.0 ? std::polar(1.0, std::arg(c)) : Complex(1.0, 0.0);
      tr.orbit_distance.push_back(metric.norm(u - rot * ru, v - rot * rv));
    }
  };

  record(0.0, metric.norm(u, v));
  snapshot(0.0);
  const long n = cfg.steps();
  const long record_count_per_snapshot = cfg.snapshot_every;
  long records = 0;
  for (long s = 1; s <= n; ++s) {
    half.apply_in_place(u, v);
    nonlinear_kick(u, v, cfg.dt, params.p);
    half.apply_in_place(u, v);
    if (!finite(u) || !finite(v)) throw NumericError("non-finite state at step " + std::to_string(s));
    tr.steps_taken = s;
    const double t = s * cfg.dt;
    const double xn = metric.norm(u, v);
    const bool blown = xn > cfg.blowup_norm;
    if (s % cfg.record_every == 0 || s == n || blown) {
      record(t, xn);
      ++records;
      if (record_count_per_snapshot > 0 && records % record_count_per_snapshot == 0 && s != n && !blown) snapshot(t);
    }
    if (blown) {
      tr.terminated = Termination::BlowUp;
      snapshot(t);
      return tr;
    }
  }
  snapshot(n * cfg.dt);
  return tr;
}

double check_Xk_invariance(const StateVector& U0, const EvolveConfig& cfg, const PhysParams& params,
                           const Grid& grid, int k) {
  cfg.validate();
  if (k < 0 || k > params.N - 1) throw DomainError("k must lie in [0, N-1]");
  const LinearPropagator half(params, grid, 0.5 * cfg.dt);
  const StarLayout& layout = half.layout();
  const Metric metric(params, grid, layout);
  Eigen::VectorXcd u = to_unknowns(U0.u, layout);
  Eigen::VectorXcd v = to_unknowns(U0.v, layout);
  auto defect = [&] {
    Eigen::VectorXcd pu = u, pv = v;
    project_chains(pu, layout, k);
    project_chains(pv, layout, k);
    return metric.norm(u - pu, v - pv);
  };

  double worst = defect();
  const long n = cfg.steps();
  for (long s = 1; s <= n; ++s) {
    half.apply_in_place(u, v);
    nonlinear_kick(u, v, cfg.dt, params.p);
    half.apply_in_place(u, v);
    if (!finite(u) || !finite(v)) throw NumericError("non-finite state at step " + std::to_string(s));
    worst = std::max(worst, defect());
    if (metric.norm(u, v) > cfg.blowup_norm) break;
  }
  return worst;
}

}  // namespace kggraph
