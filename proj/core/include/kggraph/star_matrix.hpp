#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace kggraph {

/// Unknown ordering on the (possibly symmetry-reduced) star graph.
///
/// Each block holds one vertex unknown followed by `chains` chains of
/// `nodes` unknowns (x_1 .. x_{M-1}; x_M = L is the Dirichlet node).  A chain
/// stands for `multiplicity[c]` identical edges.  Operators on (u1, u2, v1, v2)
/// use four blocks.
struct StarLayout {
  int chains = 1;
  int nodes = 0;
  std::vector<double> multiplicity;
  int blocks = 1;

  int block_dim() const { return 1 + chains * nodes; }
  int dim() const { return blocks * block_dim(); }
  int vertex(int block = 0) const { return block * block_dim(); }
  int node(int chain, int i, int block = 0) const { return block * block_dim() + 1 + chain * nodes + i; }

  /// One chain per edge.
  static StarLayout full(int N, int M);
  /// Edges 1..k collapsed into one chain and k+1..N into another (k = 0: one chain).
  static StarLayout symmetric(int N, int k, int M);

  StarLayout with_blocks(int b) const {
    StarLayout out = *this;
    out.blocks = b;
    return out;
  }

  bool operator==(const StarLayout&) const = default;
};

/// Symmetric matrix whose graph is the star itself: a vertex row coupled to
/// the first node of each chain, tridiagonal along every chain.
struct StarMatrix {
  StarLayout layout;
  double vertex_diag = 0.0;
  std::vector<double> diag;  ///< chains * nodes
  std::vector<double> off;   ///< off[c*nodes + i] couples (c,i) to (c,i-1); i = 0 couples to the vertex

  explicit StarMatrix(const StarLayout& l)
      : layout(l), diag(static_cast<size_t>(l.chains * l.nodes), 0.0), off(diag.size(), 0.0) {}

  static StarMatrix from_sparse(const Eigen::SparseMatrix<double>& A, const StarLayout& layout);
  Eigen::SparseMatrix<double> to_sparse() const;

  template <class Vec>
  Vec apply(const Vec& x) const;

  /// this + s * diag(d)
  StarMatrix plus_diagonal(const Eigen::VectorXd& d, double s) const;
};

/// LDL^T factorization of (A - sigma * diag(mass)) that eliminates every chain
/// from its far end toward the vertex; no fill-in, O(dim) work.
///
/// By Sylvester's law of inertia the number of negative pivots equals the
/// number of generalized eigenvalues of (A, mass) below sigma.
class StarFactor {
 public:
  StarFactor(const StarMatrix& A, const Eigen::VectorXd& mass, double sigma);

  int negative_pivots() const { return negative_; }
  bool had_zero_pivot() const { return zero_pivot_; }

  template <class Vec>
  Vec solve(const Vec& rhs) const;

 private:
  const StarMatrix* A_;
  std::vector<double> pivot_;  ///< chain pivots, same indexing as StarMatrix::diag
  double vertex_pivot_ = 0.0;
  int negative_ = 0;
  bool zero_pivot_ = false;
};

int count_eigenvalues_below(const StarMatrix& A, const Eigen::VectorXd& mass, double sigma);

/// Gershgorin interval containing every generalized eigenvalue of (A, mass).
std::pair<double, double> gershgorin_bounds(const StarMatrix& A, const Eigen::VectorXd& mass);

/// The index-th smallest generalized eigenvalue (0-based) by Sturm bisection.
double bisect_eigenvalue(const StarMatrix& A, const Eigen::VectorXd& mass, int index, double lo, double hi);

// ---------------------------------------------------------------------------

template <class Vec>
Vec StarMatrix::apply(const Vec& x) const {
  const int C = layout.chains;
  const int n = layout.nodes;
  Vec y(x.size());
  y[0] = vertex_diag * x[0];
  for (int c = 0; c < C; ++c) {
    const int base = 1 + c * n;
    const int o = c * n;
    for (int i = 0; i < n; ++i) {
      auto v = diag[o + i] * x[base + i];
      v += off[o + i] * (i == 0 ? x[0] : x[base + i - 1]);
      if (i + 1 < n) v += off[o + i + 1] * x[base + i + 1];
      y[base + i] = v;
    }
    y[0] += off[o] * x[base];
  }
  return y;
}

template <class Vec>
Vec StarFactor::solve(const Vec& rhs) const {
  const StarMatrix& A = *A_;
  const int C = A.layout.chains;
  const int n = A.layout.nodes;
  Vec b = rhs;
  // Forward sweep: far end -> first node of each chain -> vertex.
  for (int c = 0; c < C; ++c) {
    const int base = 1 + c * n;
    const int o = c * n;
    for (int i = n - 1; i >= 1; --i) b[base + i - 1] -= A.off[o + i] * b[base + i] / pivot_[o + i];
    if (n > 0) b[0] -= A.off[o] * b[base] / pivot_[o];
  }
  Vec x(b.size());
  x[0] = b[0] / vertex_pivot_;
  for (int c = 0; c < C; ++c) {
    const int base = 1 + c * n;
    const int o = c * n;
    for (int i = 0; i < n; ++i) {
      const auto prev = (i == 0) ? x[0] : x[base + i - 1];
      x[base + i] = (b[base + i] - A.off[o + i] * prev) / pivot_[o + i];
    }
  }
  return x;
}

}  // namespace kggraph
