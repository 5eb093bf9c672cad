#include "kggraph/operators.hpp"

#include <cmath>
#include <vector>

#include "kggraph/errors.hpp"

namespace kggraph {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::HAlpha: return "H_alpha";
    case OperatorKind::L1: return "L1";
    case OperatorKind::L2: return "L2";
    case OperatorKind::LBlock: return "L_block";
    case OperatorKind::Flow: return "Flow";
  }
  return "unknown";
}

Eigen::VectorXd lumped_mass(const StarLayout& layout, const Grid& grid) {
  const double h = grid.h();
  Eigen::VectorXd m(layout.dim());
  for (int b = 0; b < layout.blocks; ++b) {
    double total = 0.0;
    for (int c = 0; c < layout.chains; ++c) {
      total += layout.multiplicity[c];
      for (int i = 0; i < layout.nodes; ++i) m[layout.node(c, i, b)] = layout.multiplicity[c] * h;
    }
    m[layout.vertex(b)] = 0.5 * total * h;
  }
  return m;
}

StarMatrix form_stiffness(const StarLayout& layout, const Grid& grid, double alpha) {
  if (layout.blocks != 1) throw ContractError("form_stiffness expects a single-block layout");
  if (layout.nodes != grid.M() - 1) throw DimensionError("layout does not match grid");
  StarMatrix K(layout);
  const double inv_h = 1.0 / grid.h();
  K.vertex_diag = alpha;
  for (int c = 0; c < layout.chains; ++c) {
    const double w = layout.multiplicity[c] * inv_h;
    K.vertex_diag += w;
    for (int i = 0; i < layout.nodes; ++i) {
      // Element to the left plus element to the right (the last one ends at
      // the Dirichlet node).
      K.diag[c * layout.nodes + i] = 2.0 * w;
      K.off[c * layout.nodes + i] = -w;
    }
  }
  return K;
}

namespace {

OperatorAssembly make_star(OperatorKind kind, const PhysParams& params, const Grid& grid, const StarMatrix& K,
                           const Eigen::VectorXd& mass) {
  OperatorAssembly op;
  op.kind = kind;
  op.params = params;
  op.grid = grid;
  op.layout = K.layout;
  op.stiffness = K.to_sparse();
  op.mass = mass;
  return op;
}

}  // namespace

OperatorAssembly assemble_H_alpha(const PhysParams& params, const Grid& grid) {
  const StarLayout layout = StarLayout::full(params.N, grid.M());
  return make_star(OperatorKind::HAlpha, params, grid, form_stiffness(layout, grid, params.alpha),
                   lumped_mass(layout, grid));
}

OperatorAssembly assemble_L12(const PhysParams& params, const Grid& grid, int which, const GraphFunction& phi) {
  if (which != 1 && which != 2) throw DomainError("which must be 1 or 2");
  params.validate_profile();
  if (phi.N() != params.N || !(phi.grid() == grid)) throw DimensionError("profile does not match grid");
  const StarLayout layout = StarLayout::full(params.N, grid.M());
  const Eigen::VectorXd mass = lumped_mass(layout, grid);
  const Eigen::ArrayXd pw = to_unknowns(phi, layout).array().abs().pow(params.p - 1.0);
  const double factor = which == 1 ? params.p : 1.0;
  const Eigen::VectorXd potential = (params.gap() - factor * pw).matrix();
  const StarMatrix K = form_stiffness(layout, grid, params.alpha).plus_diagonal(mass.cwiseProduct(potential), 1.0);
  return make_star(which == 1 ? OperatorKind::L1 : OperatorKind::L2, params, grid, K, mass);
}

OperatorAssembly assemble_L12(const PhysParams& params, const Grid& grid, int which, ProfileSource source) {
  return assemble_L12(params, grid, which, stationary_profile(params, grid, source));
}

OperatorAssembly restrict_to_Lk(const OperatorAssembly& op, int k) {
  const int N = op.params.N;
  if (k < 0 || k > N - 1) throw DomainError("restriction index k must lie in [0, N-1]");
  if (op.restricted_k >= 0 || op.layout.chains != N) throw ContractError("restriction needs a full-graph assembly");
  if (op.kind == OperatorKind::Flow) throw ContractError("restrict the block operator before forming the flow");

  StarLayout reduced = StarLayout::symmetric(N, k, op.grid.M()).with_blocks(op.layout.blocks);
  const StarLayout& full = op.layout;
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(full.dim()));
  for (int b = 0; b < full.blocks; ++b) {
    t.emplace_back(full.vertex(b), reduced.vertex(b), 1.0);
    for (int j = 0; j < N; ++j) {
      const int c = reduced.chains == 1 ? 0 : (j < k ? 0 : 1);
      for (int i = 0; i < full.nodes; ++i) t.emplace_back(full.node(j, i, b), reduced.node(c, i, b), 1.0);
    }
  }
  SpMat P(full.dim(), reduced.dim());
  P.setFromTriplets(t.begin(), t.end());

  OperatorAssembly out = op;
  out.layout = reduced;
  out.restricted_k = k;
  out.stiffness = SpMat(P.transpose() * op.stiffness * P);
  out.mass = P.transpose() * op.mass;
  return out;
}

OperatorAssembly block_from(const OperatorAssembly& L1, const OperatorAssembly& L2) {
  if (L1.kind != OperatorKind::L1 || L2.kind != OperatorKind::L2) throw ContractError("block_from needs L1 and L2");
  if (!(L1.layout == L2.layout) || L1.layout.blocks != 1) throw DimensionError("L1 and L2 layouts differ");
  const double w = L1.params.omega;
  const int n = L1.dim();
  const Eigen::VectorXd& M = L1.mass;

  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(L1.stiffness.nonZeros() + L2.stiffness.nonZeros() + 8 * n));
  auto add_block = [&](const SpMat& A, int r0, int c0) {
    for (int col = 0; col < A.outerSize(); ++col)
      for (SpMat::InnerIterator it(A, col); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
  };
  add_block(L1.stiffness, 0, 0);
  add_block(L2.stiffness, n, n);
  for (int i = 0; i < n; ++i) {
    const double m = M[i];
    t.emplace_back(i, i, w * w * m);
    t.emplace_back(n + i, n + i, w * w * m);
    t.emplace_back(2 * n + i, 2 * n + i, m);
    t.emplace_back(3 * n + i, 3 * n + i, m);
    t.emplace_back(i, 3 * n + i, -w * m);
    t.emplace_back(3 * n + i, i, -w * m);
    t.emplace_back(n + i, 2 * n + i, w * m);
    t.emplace_back(2 * n + i, n + i, w * m);
  }
  OperatorAssembly out;
  out.kind = OperatorKind::LBlock;
  out.params = L1.params;
  out.grid = L1.grid;
  out.layout = L1.layout.with_blocks(4);
  out.restricted_k = L1.restricted_k;
  out.stiffness = SpMat(4 * n, 4 * n);
  out.stiffness.setFromTriplets(t.begin(), t.end());
  out.mass = lumped_mass(out.layout, out.grid);
  return out;
}

OperatorAssembly assemble_block_L(const PhysParams& params, const Grid& grid, ProfileSource source,
                                  std::optional<int> restrict_k) {
  const GraphFunction phi = stationary_profile(params, grid, source);
  OperatorAssembly L1 = assemble_L12(params, grid, 1, phi);
  OperatorAssembly L2 = assemble_L12(params, grid, 2, phi);
  if (restrict_k) {
    L1 = restrict_to_Lk(L1, *restrict_k);
    L2 = restrict_to_Lk(L2, *restrict_k);
  }
  return block_from(L1, L2);
}

OperatorAssembly assemble_flow(const PhysParams& params, const Grid& grid, ProfileSource source,
                               std::optional<int> restrict_k) {
  const OperatorAssembly S = assemble_block_L(params, grid, source, restrict_k);
  const int n = S.layout.block_dim();
  // J^{-1}(f1, f2, g1, g2) = (g1, g2, -f1, -f2).
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(S.stiffness.nonZeros()));
  for (int col = 0; col < S.stiffness.outerSize(); ++col) {
    for (SpMat::InnerIterator it(S.stiffness, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      const double v = it.value() / S.mass[r];
      const int blk = r / n;
      const int off = r % n;
      const int target = blk >= 2 ? (blk - 2) * n + off : (blk + 2) * n + off;
      t.emplace_back(target, it.col(), blk >= 2 ? v : -v);
    }
  }
  OperatorAssembly out = S;
  out.kind = OperatorKind::Flow;
  out.stiffness = SpMat(S.dim(), S.dim());
  out.stiffness.setFromTriplets(t.begin(), t.end());
  out.mass = Eigen::VectorXd::Ones(S.dim());
  return out;
}

BandEdges band_edges(const PhysParams& params) {
  const double g = params.gap();
  if (!(g > 0.0)) throw DomainError("band edges need m^2 - omega^2 > 0");
  const double m2 = params.m * params.m;
  const double b = 1.0 + m2;
  const double disc = (1.0 - m2) * (1.0 - m2) + 4.0 * params.omega * params.omega;
  BandEdges e;
  // Larger root directly, smaller from the product of roots (no cancellation).
  e.sigma2 = 0.5 * (b + std::sqrt(disc));
  e.sigma1 = g / e.sigma2;
  e.degenerate = disc == 0.0;
  return e;
}

double mu_of_lambda(double lambda, double omega) { return lambda + lambda * omega * omega / (1.0 - lambda); }

std::pair<double, double> block_eigenvalues_from_mu(double mu, double omega) {
  const double b = 1.0 + omega * omega + mu;
  const double disc = std::max(0.0, b * b - 4.0 * mu);
  const double upper = 0.5 * (b + std::sqrt(disc));
  return {mu / upper, upper};
}

}  // namespace kggraph
