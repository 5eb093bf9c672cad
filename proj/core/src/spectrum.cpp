#include "kggraph/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <lapacke.h>

#include "kggraph/errors.hpp"

namespace kggraph {

using SpMat = Eigen::SparseMatrix<double>;

double default_tol_zero(const PhysParams& params, const Grid& grid) {
  const double h = grid.h();
  return 50.0 * h * h * (1.0 + std::abs(params.alpha) + params.m * params.m);
}

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> x) {
  const double big = x.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > 1e-10 * big) {
      if (x[i] < 0) x = -x;
      return;
    }
  }
}

void classify(SpectralReport& r) {
  r.morse_index = 0;
  r.nullity = 0;
  for (double l : r.eigenvalues) {
    if (l < -r.tol_zero)
      ++r.morse_index;
    else if (l <= r.tol_zero)
      ++r.nullity;
  }
}

SpectralReport dense_symmetric(const OperatorAssembly& op, double tol, bool vectors) {
  const int n = op.dim();
  const Eigen::VectorXd d = op.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd A = d.asDiagonal() * Eigen::MatrixXd(op.stiffness) * d.asDiagonal();
  std::vector<double> w(static_cast<size_t>(n));
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n, A.data(), n, w.data());
  if (info != 0) throw NumericError("dense symmetric eigensolver failed (info = " + std::to_string(info) + ")");
  SpectralReport r;
  r.dim = n;
  r.tol_zero = tol;
  r.eigenvalues = std::move(w);
  if (vectors) {
    r.eigenvectors = d.asDiagonal() * A;
    for (int j = 0; j < n; ++j) fix_sign(r.eigenvectors.col(j));
  }
  classify(r);
  return r;
}

SpMat sub_block(const SpMat& S, int bi, int bj, int n) {
  return SpMat(S.block(bi * n, bj * n, n, n));
}

Eigen::MatrixXd star_vectors(const StarMatrix& A, const Eigen::VectorXd& mass, const std::vector<double>& lambdas) {
  const int n = A.layout.dim();
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(lambdas.size()));
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto m_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a.array() * mass.array() * b.array()).sum(); };
  for (size_t j = 0; j < lambdas.size(); ++j) {
    const double lam = lambdas[j];
    const double cluster = 1e-8 * (1.0 + std::abs(lam));
    const StarFactor fac(A, mass, lam);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = dist(rng);
    for (int it = 0; it < 6; ++it) {
      x = fac.solve(Eigen::VectorXd(mass.cwiseProduct(x)));
      for (size_t q = 0; q < j; ++q) {
        if (std::abs(lambdas[q] - lam) <= cluster) x -= m_dot(x, X.col(q)) * X.col(q);
      }
      x /= std::sqrt(m_dot(x, x));
      const double res = (A.apply(x) - lam * mass.cwiseProduct(x)).norm() / std::sqrt(mass.sum());
      if (it >= 1 && res <= 1e-12 * (1.0 + std::abs(lam)) * A.apply(x).norm()) break;
    }
    fix_sign(x);
    X.col(static_cast<Eigen::Index>(j)) = x;
  }
  return X;
}

}  // namespace

std::vector<double> star_lowest_eigenvalues(const StarMatrix& A, const Eigen::VectorXd& mass, int count) {
  count = std::min(count, A.layout.dim());
  auto [lo, hi] = gershgorin_bounds(A, mass);
  const double pad = 1e-12 * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
  lo -= pad;
  hi += pad;
  std::vector<double> out;
  out.reserve(static_cast<size_t>(count));
  double start = lo;
  for (int i = 0; i < count; ++i) {
    // Eigenvalues are found in ascending order; the previous one bounds the next from below.
    const double l = bisect_eigenvalue(A, mass, i, start, hi);
    out.push_back(l);
    start = std::max(lo, l - 1e-12 * (1.0 + std::abs(l)));
  }
  return out;
}

std::pair<int, int> star_inertia(const StarMatrix& A, const Eigen::VectorXd& mass, double tol) {
  const int below = count_eigenvalues_below(A, mass, -tol);
  // Count of eigenvalues <= tol: below the next representable number above tol.
  const int upto = count_eigenvalues_below(A, mass, std::nextafter(tol, INFINITY));
  return {below, upto - below};
}

SpectralReport solve_spectrum(const OperatorAssembly& op, double tol_zero) {
  SpectrumOptions o;
  o.tol_zero = tol_zero;
  return solve_spectrum(op, o);
}

SpectralReport solve_spectrum(const OperatorAssembly& op, const SpectrumOptions& options) {
  if (!op.is_symmetric()) throw ContractError("solve_spectrum needs a symmetric operator; use solve_flow_spectrum");
  const double tol = options.tol_zero.value_or(default_tol_zero(op.params, op.grid));
  std::optional<BandEdges> edges;
  if (op.kind == OperatorKind::LBlock) edges = band_edges(op.params);

  if (op.dim() <= options.dense_cap) {
    SpectralReport r = dense_symmetric(op, tol, options.vectors);
    r.band_edges = edges;
    return r;
  }

  SpectralReport r;
  r.dim = op.dim();
  r.tol_zero = tol;
  r.band_edges = edges;
  r.complete = false;

  if (op.is_star()) {
    const StarMatrix A = StarMatrix::from_sparse(op.stiffness, op.layout);
    std::tie(r.morse_index, r.nullity) = star_inertia(A, op.mass, tol);
    r.eigenvalues = star_lowest_eigenvalues(A, op.mass, options.max_eigenvalues);
    if (options.vectors) r.eigenvectors = star_vectors(A, op.mass, r.eigenvalues);
    return r;
  }

  if (op.kind != OperatorKind::LBlock) throw SizeError("operator too large for the dense eigensolver");
  if (options.vectors) throw SizeError("block eigenvectors above the dense cap are not available");
  // Each eigenvalue mu of L1 or L2 yields the pair of roots of
  // lambda^2 - (1 + omega^2 + mu) lambda + mu; the lower root increases with mu,
  // so the lowest block eigenvalues come from the lowest mu.
  const double w = op.params.omega;
  const int n = op.layout.block_dim();
  const StarLayout single = op.layout.with_blocks(1);
  const Eigen::VectorXd m1 = op.mass.head(n);
  const double mu_lo = mu_of_lambda(-tol, w);
  const double mu_hi = mu_of_lambda(tol, w);
  std::vector<double> lowers;
  for (int b = 0; b < 2; ++b) {
    SpMat K = sub_block(op.stiffness, b, b, n);
    StarMatrix A = StarMatrix::from_sparse(K, single).plus_diagonal(m1, -w * w);
    const int below = count_eigenvalues_below(A, m1, mu_lo);
    const int upto = count_eigenvalues_below(A, m1, std::nextafter(mu_hi, INFINITY));
    r.morse_index += below;
    r.nullity += upto - below;
    for (double mu : star_lowest_eigenvalues(A, m1, options.max_eigenvalues))
      lowers.push_back(block_eigenvalues_from_mu(mu, w).first);
  }
  std::sort(lowers.begin(), lowers.end());
  lowers.resize(std::min<size_t>(lowers.size(), static_cast<size_t>(options.max_eigenvalues)));
  r.eigenvalues = std::move(lowers);
  return r;
}

std::vector<std::complex<double>> solve_flow_spectrum(const PhysParams& params, const Grid& grid,
                                                      const FlowOptions& options) {
  params.validate_profile();
  if (options.method == FlowMethod::RealAxis) throw ContractError("solve_flow_spectrum is the dense path");
  const int block = options.restrict_k ? StarLayout::symmetric(params.N, *options.restrict_k, grid.M()).block_dim()
                                       : StarLayout::full(params.N, grid.M()).block_dim();
  const int n = 4 * block;
  if (n > options.dense_cap)
    throw SizeError("flow generator of dimension " + std::to_string(n) + " exceeds the dense cap " +
                    std::to_string(options.dense_cap));
  const OperatorAssembly G = assemble_flow(params, grid, options.source, options.restrict_k);
  Eigen::MatrixXd A(G.stiffness);
  std::vector<double> wr(static_cast<size_t>(n)), wi(static_cast<size_t>(n));
  const lapack_int info =
      LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, wr.data(), wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericError("dense eigensolver failed on the flow generator (info = " + std::to_string(info) + ")");
  std::vector<std::complex<double>> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

namespace {

struct Sym2 {
  double a, b, c;  // [[a, b], [b, c]]

  double det() const { return a * c - b * b; }
  int negatives() const {
    const double d = det();
    if (d < 0) return 1;
    return a < 0 ? 2 : 0;
  }
};

/// s <- s - E t^{-1} E with E = diag(e1, e2).
void subtract_coupling(Sym2& s, const Sym2& t, double e1, double e2) {
  double d = t.det();
  const double scale = std::abs(t.a * t.c) + t.b * t.b;
  const double tiny = 1e-300 + std::numeric_limits<double>::epsilon() * scale;
  if (std::abs(d) < tiny) d = d < 0 ? -tiny : tiny;
  s.a -= e1 * e1 * t.c / d;
  s.b -= -e1 * e2 * t.b / d;
  s.c -= e2 * e2 * t.a / d;
}

}  // namespace

int real_axis_count(const StarMatrix& K1, const StarMatrix& K2, const Eigen::VectorXd& mass, double omega,
                    double lambda) {
  // Symmetric form [[K1 + l^2 M, -2 l w M], [-2 l w M, -(K2 + l^2 M)]], ordered
  // node by node so the star structure survives with 2x2 pivots.  Its inertia
  // is that of -(K2 + l^2 M) (dim negatives) plus that of T(l).
  const StarLayout& layout = K1.layout;
  const int C = layout.chains;
  const int n = layout.nodes;
  const double l2 = lambda * lambda;
  const double cpl = -2.0 * lambda * omega;
  auto block = [&](double k1, double k2, double m) { return Sym2{k1 + l2 * m, cpl * m, -(k2 + l2 * m)}; };
  int negatives = 0;
  Sym2 vertex = block(K1.vertex_diag, K2.vertex_diag, mass[0]);
  for (int c = 0; c < C; ++c) {
    const int o = c * n;
    Sym2 s{0, 0, 0};
    for (int i = n - 1; i >= 0; --i) {
      Sym2 cur = block(K1.diag[o + i], K2.diag[o + i], mass[1 + o + i]);
      if (i + 1 < n) subtract_coupling(cur, s, K1.off[o + i + 1], -K2.off[o + i + 1]);
      s = cur;
      negatives += s.negatives();
    }
    if (n > 0) subtract_coupling(vertex, s, K1.off[o], -K2.off[o]);
  }
  negatives += vertex.negatives();
  return negatives - layout.dim();
}

RealAxisInstability real_axis_instability(const PhysParams& params, const Grid& grid, const FlowOptions& options) {
  params.validate_profile();
  const GraphFunction phi = stationary_profile(params, grid, options.source);
  OperatorAssembly L1 = assemble_L12(params, grid, 1, phi);
  OperatorAssembly L2 = assemble_L12(params, grid, 2, phi);
  if (options.restrict_k) {
    L1 = restrict_to_Lk(L1, *options.restrict_k);
    L2 = restrict_to_Lk(L2, *options.restrict_k);
  }
  const StarMatrix K1 = StarMatrix::from_sparse(L1.stiffness, L1.layout);
  const StarMatrix K2 = StarMatrix::from_sparse(L2.stiffness, L2.layout);
  const double w = params.omega;
  auto count = [&](double l) { return real_axis_count(K1, K2, L1.mass, w, l); };

  RealAxisInstability out;
  // K2 is singular only up to the profile residual, so l^2 must dominate it.
  out.floor = 1e-4;
  out.count = count(out.floor);
  if (out.count <= 0) {
    out.count = 0;
    return out;
  }
  // T(l) >= K1 + l^2 M is positive once l^2 exceeds -min eig(K1, M).
  const double lo_k1 = gershgorin_bounds(K1, L1.mass).first;
  double hi = std::sqrt(std::max(0.0, -lo_k1)) + 1.0;
  while (count(hi) > 0) hi *= 2.0;
  double lo = out.floor;
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (count(mid) > 0 ? lo : hi) = mid;
  }
  out.largest = 0.5 * (lo + hi);
  return out;
}

SlopeEstimate eigenvalue_slope_at_alpha0(const PhysParams& params, const Grid& grid, double dalpha,
                                         ProfileSource source) {
  if (params.k < 1) throw DomainError("the eigenvalue slope is defined for k >= 1");
  if (!(dalpha > 0.0)) throw DomainError("dalpha must be positive");
  SlopeEstimate est;
  auto second = [&](double a) {
    PhysParams q = params;
    q.alpha = a;
    const OperatorAssembly L = restrict_to_Lk(assemble_L12(q, grid, 1, source), q.k);
    const StarMatrix A = StarMatrix::from_sparse(L.stiffness, L.layout);
    const std::vector<double> l = star_lowest_eigenvalues(A, L.mass, 3);
    const double sep = std::min(l[1] - l[0], l[2] - l[1]);
    if (sep <= 1e-9 * (1.0 + std::abs(l[1]))) est.ambiguous = true;
    return l[1];
  };
  est.lambda_plus = second(dalpha);
  est.lambda_minus = second(-dalpha);
  est.slope = (est.lambda_plus - est.lambda_minus) / (2.0 * dalpha);
  return est;
}

}  // namespace kggraph
