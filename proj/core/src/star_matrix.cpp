#include "kggraph/star_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kggraph/errors.hpp"

namespace kggraph {

StarLayout StarLayout::full(int N, int M) {
  StarLayout l;
  l.chains = N;
  l.nodes = M - 1;
  l.multiplicity.assign(static_cast<size_t>(N), 1.0);
  return l;
}

StarLayout StarLayout::symmetric(int N, int k, int M) {
  if (k < 0 || k >= N) throw DomainError("symmetric subspace index k must lie in [0, N-1]");
  StarLayout l;
  l.nodes = M - 1;
  if (k == 0) {
    l.chains = 1;
    l.multiplicity = {static_cast<double>(N)};
  } else {
    l.chains = 2;
    l.multiplicity = {static_cast<double>(k), static_cast<double>(N - k)};
  }
  return l;
}

StarMatrix StarMatrix::from_sparse(const Eigen::SparseMatrix<double>& A, const StarLayout& layout) {
  if (layout.blocks != 1) throw ContractError("star extraction needs a single-block layout");
  if (A.rows() != layout.dim() || A.cols() != layout.dim()) throw DimensionError("matrix does not match layout");
  StarMatrix S(layout);
  S.vertex_diag = A.coeff(0, 0);
  for (int c = 0; c < layout.chains; ++c) {
    for (int i = 0; i < layout.nodes; ++i) {
      const int r = layout.node(c, i);
      const int o = c * layout.nodes + i;
      S.diag[o] = A.coeff(r, r);
      S.off[o] = A.coeff(r, i == 0 ? 0 : r - 1);
    }
  }
  return S;
}

Eigen::SparseMatrix<double> StarMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(diag.size() * 3 + 1);
  t.emplace_back(0, 0, vertex_diag);
  for (int c = 0; c < layout.chains; ++c) {
    for (int i = 0; i < layout.nodes; ++i) {
      const int r = layout.node(c, i);
      const int o = c * layout.nodes + i;
      const int prev = (i == 0) ? 0 : r - 1;
      t.emplace_back(r, r, diag[o]);
      t.emplace_back(r, prev, off[o]);
      t.emplace_back(prev, r, off[o]);
    }
  }
  Eigen::SparseMatrix<double> A(layout.dim(), layout.dim());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

StarMatrix StarMatrix::plus_diagonal(const Eigen::VectorXd& d, double s) const {
  StarMatrix out = *this;
  out.vertex_diag += s * d[0];
  for (size_t o = 0; o < diag.size(); ++o) out.diag[o] += s * d[static_cast<Eigen::Index>(o + 1)];
  return out;
}

namespace {

double guard_pivot(double d, double scale, bool& zero) {
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(scale, std::numeric_limits<double>::min());
  if (std::abs(d) < tiny) {
    zero = true;
    return d < 0 ? -tiny : tiny;
  }
  return d;
}

}  // namespace

StarFactor::StarFactor(const StarMatrix& A, const Eigen::VectorXd& mass, double sigma)
    : A_(&A), pivot_(A.diag.size()) {
  const int C = A.layout.chains;
  const int n = A.layout.nodes;
  if (mass.size() != A.layout.dim()) throw DimensionError("mass does not match star layout");
  double vertex = A.vertex_diag - sigma * mass[0];
  for (int c = 0; c < C; ++c) {
    const int o = c * n;
    const int base = 1 + o;
    double d = 0.0;
    for (int i = n - 1; i >= 0; --i) {
      double a = A.diag[o + i] - sigma * mass[base + i];
      if (i + 1 < n) a -= A.off[o + i + 1] * A.off[o + i + 1] / pivot_[o + i + 1];
      d = guard_pivot(a, std::abs(A.diag[o + i]) + std::abs(sigma * mass[base + i]), zero_pivot_);
      pivot_[o + i] = d;
      if (d < 0) ++negative_;
    }
    if (n > 0) vertex -= A.off[o] * A.off[o] / pivot_[o];
  }
  vertex_pivot_ = guard_pivot(vertex, std::abs(A.vertex_diag) + std::abs(sigma * mass[0]), zero_pivot_);
  if (vertex_pivot_ < 0) ++negative_;
}

int count_eigenvalues_below(const StarMatrix& A, const Eigen::VectorXd& mass, double sigma) {
  return StarFactor(A, mass, sigma).negative_pivots();
}

std::pair<double, double> gershgorin_bounds(const StarMatrix& A, const Eigen::VectorXd& mass) {
  const int C = A.layout.chains;
  const int n = A.layout.nodes;
  double radius_v = 0.0;
  for (int c = 0; c < C; ++c) radius_v += std::abs(A.off[c * n]);
  double lo = (A.vertex_diag - radius_v) / mass[0];
  double hi = (A.vertex_diag + radius_v) / mass[0];
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < n; ++i) {
      const int o = c * n + i;
      double r = std::abs(A.off[o]);
      if (i + 1 < n) r += std::abs(A.off[o + 1]);
      const double w = mass[1 + o];
      lo = std::min(lo, (A.diag[o] - r) / w);
      hi = std::max(hi, (A.diag[o] + r) / w);
    }
  }
  return {lo, hi};
}

double bisect_eigenvalue(const StarMatrix& A, const Eigen::VectorXd& mass, int index, double lo, double hi) {
  const double eps = std::numeric_limits<double>::epsilon();
  // Sturm counts carry a backward error of order eps * ||A||; bisecting below
  // that only burns iterations.
  const double floor = eps * std::max(std::abs(lo), std::abs(hi));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) + floor) break;
    if (count_eigenvalues_below(A, mass, mid) > index)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace kggraph
