#include "kggraph/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "kggraph/errors.hpp"

namespace kggraph {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::OrbitallyStable: return "OrbitallyStable";
    case Verdict::OrbitallyUnstable: return "OrbitallyUnstable";
    case Verdict::LinearlyUnstable: return "LinearlyUnstable";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

std::string to_string(Clause c) {
  switch (c) {
    case Clause::main_i_a: return "main_i_a";
    case Clause::main_i_b: return "main_i_b";
    case Clause::main_ii_a: return "main_ii_a";
    case Clause::main_ii_b: return "main_ii_b";
    case Clause::none: return "none";
  }
  return "unknown";
}

std::string to_string(StabilitySpace s) {
  switch (s) {
    case StabilitySpace::Xk: return "X_k";
    case StabilitySpace::Xeq: return "X_eq";
    case StabilitySpace::Full: return "X";
  }
  return "unknown";
}

StabilitySpace stability_space(const PhysParams& params) {
  if (params.k >= 1) return StabilitySpace::Xk;
  if (params.alpha > 0.0) return StabilitySpace::Xeq;
  return StabilitySpace::Full;
}

std::optional<int> restriction_for(StabilitySpace space, const PhysParams& params) {
  switch (space) {
    case StabilitySpace::Xk: return params.k;
    case StabilitySpace::Xeq: return 0;
    case StabilitySpace::Full: return std::nullopt;
  }
  return std::nullopt;
}

namespace {

/// Clause whose hypotheses hold at the point, with its conclusion.
std::optional<std::pair<Clause, Verdict>> applicable_clause(const PhysParams& params, SlopeRegion region) {
  if (params.k >= 1) {
    if (params.alpha > 0.0 && region == SlopeRegion::UnstableSide)
      return std::make_pair(Clause::main_i_a, Verdict::OrbitallyUnstable);
    if (params.alpha < 0.0 && region == SlopeRegion::StableSide)
      return std::make_pair(Clause::main_i_b, Verdict::LinearlyUnstable);
  } else {
    if (params.alpha > 0.0 && region == SlopeRegion::UnstableSide)
      return std::make_pair(Clause::main_ii_a, Verdict::OrbitallyUnstable);
    if (params.alpha < 0.0 && region == SlopeRegion::StableSide)
      return std::make_pair(Clause::main_ii_b, Verdict::OrbitallyStable);
  }
  return std::nullopt;
}

struct StarOp {
  StarMatrix A;
  Eigen::VectorXd mass;
};

StarOp star_of(const OperatorAssembly& op) { return {StarMatrix::from_sparse(op.stiffness, op.layout), op.mass}; }

}  // namespace

StabilityVerdict classify(const PhysParams& params, const Grid& grid, const ClassifyOptions& options) {
  params.validate_profile();
  StabilityVerdict out;
  out.params = params;
  out.space = stability_space(params);
  out.tol_zero = options.tol_zero.value_or(default_tol_zero(params, grid));
  const double tol = out.tol_zero;
  const BandEdges edges = band_edges(params);
  out.sigma1 = edges.sigma1;
  out.sigma2 = edges.sigma2;

  const GraphFunction phi = stationary_profile(params, grid, options.source);
  const OperatorAssembly L1 = assemble_L12(params, grid, 1, phi);
  const OperatorAssembly L2 = assemble_L12(params, grid, 2, phi);
  {
    const StarOp full = star_of(L1);
    out.full_morse_L1 = star_inertia(full.A, full.mass, tol).first;
  }

  const std::optional<int> r = restriction_for(out.space, params);
  const StarOp s1 = star_of(r ? restrict_to_Lk(L1, *r) : L1);
  const StarOp s2 = star_of(r ? restrict_to_Lk(L2, *r) : L2);

  // Block eigenvalues come in pairs attached to eigenvalues mu of L1 and L2;
  // the lower member increases with mu, so thresholds on lambda map to
  // thresholds on mu.
  const double w = params.omega;
  const double mu_lo = mu_of_lambda(-tol, w);
  const double mu_hi = mu_of_lambda(tol, w);
  double smallest_mu = std::numeric_limits<double>::infinity();
  for (const StarOp* s : {&s1, &s2}) {
    const int below = count_eigenvalues_below(s->A, s->mass, mu_lo);
    const int upto = count_eigenvalues_below(s->A, s->mass, std::nextafter(mu_hi, INFINITY));
    out.evidence.morse_index += below;
    out.evidence.nullity += upto - below;
    if (upto < s->A.layout.dim()) {
      const auto [lo, hi] = gershgorin_bounds(s->A, s->mass);
      smallest_mu = std::min(smallest_mu, bisect_eigenvalue(s->A, s->mass, upto, std::max(lo, mu_hi), hi));
    }
  }
  out.smallest_positive = block_eigenvalues_from_mu(smallest_mu, w).first;
  out.evidence.band_gap_ok = edges.sigma1 > tol && out.smallest_positive > tol;

  const SlopeReport slope = slope_closed_form(params);
  out.region = slope.region;
  out.evidence.slope_sign = slope.slope_sign();

  const Evidence& e = out.evidence;
  if (e.nullity != 1) {
    out.diagnostic = "degenerate kernel: nullity " + std::to_string(e.nullity) + " at tol_zero " + std::to_string(tol);
    return out;
  }
  if (!e.band_gap_ok) {
    out.diagnostic = "no spectral gap above zero";
    return out;
  }
  if (slope.region != SlopeRegion::StableSide && slope.region != SlopeRegion::UnstableSide) {
    out.diagnostic = "slope sign not determined in closed form (region " + to_string(slope.region) + ")";
    return out;
  }
  if (e.morse_index == 1 && e.slope_sign > 0)
    out.verdict = Verdict::OrbitallyStable;
  else if (e.morse_index == 1 && e.slope_sign < 0)
    out.verdict = Verdict::OrbitallyUnstable;
  else if (e.morse_index == 2 && e.slope_sign > 0)
    out.verdict = Verdict::LinearlyUnstable;
  else {
    out.diagnostic = "index " + std::to_string(e.morse_index) + " with slope sign " + std::to_string(e.slope_sign) +
                     " matches no rule";
    return out;
  }

  if (const auto c = applicable_clause(params, slope.region)) {
    if (c->second == out.verdict)
      out.clause = c->first;
    else
      out.diagnostic = "verdict disagrees with " + to_string(c->first) + ", which predicts " + to_string(c->second);
  }
  return out;
}

StateVector perturbation_direction(const PhysParams& params, const Grid& grid, PerturbationDirection direction,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double kappa = std::sqrt(std::max(params.gap(), 1e-12));
  // Smooth localized shapes with random weights per edge.
  std::vector<double> a(static_cast<size_t>(params.N)), b(a.size()), c(a.size()), d(a.size());
  for (int j = 0; j < params.N; ++j) {
    a[j] = 1.0 + 0.5 * dist(rng);
    b[j] = dist(rng);
    c[j] = dist(rng);
    d[j] = dist(rng);
  }
  auto shape_u = [&](int j, double x) {
    const double g = std::exp(-0.5 * kappa * x);
    return Complex(a[j] * g * (1.0 + b[j] * kappa * x), 0.3 * c[j] * g * kappa * x);
  };
  auto shape_v = [&](int j, double x) {
    const double g = std::exp(-0.5 * kappa * x);
    return Complex(0.3 * d[j] * g, 0.2 * b[j] * g * kappa * x);
  };
  GraphFunction u = GraphFunction::sample(params.N, grid, shape_u);
  GraphFunction v = GraphFunction::sample(params.N, grid, shape_v);
  // Continuity: the vertex is shared, so edge 0's value at 0 is the vertex value; the
  // other edges' shapes are shifted to agree.
  for (int j = 1; j < params.N; ++j) {
    const Complex du = shape_u(0, 0.0) - shape_u(j, 0.0);
    const Complex dv = shape_v(0, 0.0) - shape_v(j, 0.0);
    for (int i = 1; i <= grid.M(); ++i) {
      const double g = std::exp(-kappa * grid.x(i));
      u.at(j, i) += du * g;
      v.at(j, i) += dv * g;
    }
  }
  for (int j = 0; j < params.N; ++j) {
    u.at(j, grid.M()) = 0.0;
    v.at(j, grid.M()) = 0.0;
  }
  StateVector W(u, v);
  if (direction == PerturbationDirection::RadialSymmetric) W = project_Xk(W, params.k);
  const double n = x_norm(W);
  if (!(n > 0.0)) throw NumericError("degenerate perturbation direction");
  W *= Complex(1.0 / n, 0.0);
  return W;
}

PerturbationResult perturbation_experiment(const PhysParams& params, const Grid& grid, double eps,
                                           PerturbationDirection direction, const EvolveConfig& cfg,
                                           std::uint64_t seed) {
  if (!(eps >= 0.0 && eps <= 0.1)) throw DomainError("eps must lie in [0, 0.1]");
  params.validate_profile();
  const GraphFunction phi = discrete_profile(params, grid);
  const StateVector Phi = standing_wave_state(phi, params.omega);
  StateVector U0 = Phi;
  if (eps > 0.0) U0 += Complex(eps, 0.0) * perturbation_direction(params, grid, direction, seed);

  PerturbationResult res;
  res.trajectory = evolve(U0, cfg, params, grid, Phi);
  const auto& d = res.trajectory.orbit_distance;
  for (size_t i = 0; i < d.size(); ++i) {
    res.max_distance = std::max(res.max_distance, d[i]);
    if (res.first_exceed_time < 0.0 && eps > 0.0 && d[i] >= 10.0 * eps) res.first_exceed_time = res.trajectory.times[i];
  }
  if (res.trajectory.terminated == Termination::BlowUp) {
    res.max_distance = std::numeric_limits<double>::infinity();
    if (res.first_exceed_time < 0.0) res.first_exceed_time = res.trajectory.times.back();
  }
  return res;
}

double linear_growth_rate(const PhysParams& params, const Grid& grid, const FlowOptions& options) {
  FlowOptions o = options;
  if (!o.restrict_k) o.restrict_k = restriction_for(stability_space(params), params);
  const int block = o.restrict_k ? StarLayout::symmetric(params.N, *o.restrict_k, grid.M()).block_dim()
                                 : StarLayout::full(params.N, grid.M()).block_dim();
  if (o.method == FlowMethod::RealAxis || (o.method == FlowMethod::Auto && 4 * block > o.dense_cap))
    return real_axis_instability(params, grid, o).largest;
  o.method = FlowMethod::Dense;
  std::vector<std::complex<double>> ev = solve_flow_spectrum(params, grid, o);
  if (ev.size() <= 2) return 0.0;
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a.real() < b.real();
  });
  double rate = -std::numeric_limits<double>::infinity();
  for (size_t i = 2; i < ev.size(); ++i) rate = std::max(rate, ev[i].real());
  return rate;
}

unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("KGGRAPH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = static_cast<unsigned>(v);
  }
  return n;
}

namespace {

bool crosses_boundary(const PhysParams& a, const PhysParams& b) {
  if ((a.alpha > 0) != (b.alpha > 0) || (a.alpha < 0) != (b.alpha < 0)) return true;
  if ((a.omega > 0) != (b.omega > 0) || (a.omega < 0) != (b.omega < 0)) return true;
  const double ea = a.m * std::sqrt(a.p - 1.0) / 2.0;
  const double eb = b.m * std::sqrt(b.p - 1.0) / 2.0;
  const double sa = std::abs(a.omega) - ea;
  const double sb = std::abs(b.omega) - eb;
  return (sa > 0) != (sb > 0) || (sa < 0) != (sb < 0);
}

bool comparable(const PhysParams& a, const PhysParams& b) {
  return a.N == b.N && a.k == b.k && a.m == b.m && a.p == b.p;
}

}  // namespace

PhaseDiagram phase_diagram(const std::vector<PhysParams>& sweep, const GridSpec& grid, const ClassifyOptions& options) {
  PhaseDiagram out;
  out.rows.resize(sweep.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < sweep.size(); i = next++) {
      PhaseRow& row = out.rows[i];
      row.params = sweep[i];
      try {
        row.params.validate_profile();
        row.verdict = classify(row.params, grid.make(row.params), options);
      } catch (const Error& e) {
        row.skipped_reason = e.what();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(std::max<size_t>(1, sweep.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (size_t i = 1; i < out.rows.size(); ++i) {
    const PhaseRow& a = out.rows[i - 1];
    const PhaseRow& b = out.rows[i];
    if (!a.verdict || !b.verdict || !comparable(a.params, b.params)) continue;
    if (a.verdict->verdict == b.verdict->verdict) continue;
    if (crosses_boundary(a.params, b.params)) continue;
    out.warnings.push_back("verdict changes between rows " + std::to_string(i - 1) + " and " + std::to_string(i) +
                           " without crossing a region boundary");
  }
  return out;
}

}  // namespace kggraph
