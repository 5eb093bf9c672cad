#include "kggraph/graph.hpp"

#include <algorithm>
#include <cmath>

#include "kggraph/errors.hpp"

namespace kggraph {

GraphFunction::GraphFunction(int N, const Grid& grid)
    : N_(N), grid_(grid), values_(static_cast<size_t>(N) * grid.M(), Complex{}) {
  if (N < 2) throw DomainError("a star graph needs at least two edges");
}

GraphFunction GraphFunction::sample(int N, const Grid& grid, const std::function<Complex(int, double)>& f) {
  GraphFunction out(N, grid);
  out.vertex_ = f(0, 0.0);
  for (int j = 0; j < N; ++j)
    for (int i = 1; i <= grid.M(); ++i) out.at(j, i) = f(j, grid.x(i));
  return out;
}

GraphFunction GraphFunction::constant(int N, const Grid& grid, Complex c) {
  GraphFunction out(N, grid);
  out.vertex_ = c;
  std::fill(out.values_.begin(), out.values_.end(), c);
  return out;
}

double GraphFunction::max_abs_imag() const {
  double m = std::abs(vertex_.imag());
  for (const auto& z : values_) m = std::max(m, std::abs(z.imag()));
  return m;
}

double GraphFunction::max_abs() const {
  double m = std::abs(vertex_);
  for (const auto& z : values_) m = std::max(m, std::abs(z));
  return m;
}

GraphFunction& GraphFunction::operator+=(const GraphFunction& o) {
  if (!same_shape(o)) throw DimensionError("graph functions live on different grids");
  vertex_ += o.vertex_;
  for (size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GraphFunction& GraphFunction::operator-=(const GraphFunction& o) {
  if (!same_shape(o)) throw DimensionError("graph functions live on different grids");
  vertex_ -= o.vertex_;
  for (size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GraphFunction& GraphFunction::operator*=(Complex s) {
  vertex_ *= s;
  for (auto& z : values_) z *= s;
  return *this;
}

StateVector::StateVector(GraphFunction u_, GraphFunction v_) : u(std::move(u_)), v(std::move(v_)) {
  if (!u.same_shape(v)) throw DimensionError("state components live on different grids");
}

StateVector& StateVector::operator+=(const StateVector& o) {
  u += o.u;
  v += o.v;
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& o) {
  u -= o.u;
  v -= o.v;
  return *this;
}

StateVector& StateVector::operator*=(Complex s) {
  u *= s;
  v *= s;
  return *this;
}

StateVector standing_wave_state(const GraphFunction& phi, double omega) {
  return {phi, Complex(0.0, omega) * phi};
}

double node_weight(const Grid& grid, int N, int i) {
  if (i == 0) return 0.5 * N * grid.h();
  if (i == grid.M()) return 0.5 * grid.h();
  return grid.h();
}

namespace {

void require_same(const GraphFunction& f, const GraphFunction& g) {
  if (!f.same_shape(g)) throw DimensionError("graph functions live on different grids");
}

}  // namespace

Complex l2_pairing(const GraphFunction& f, const GraphFunction& g) {
  require_same(f, g);
  const Grid& grid = f.grid();
  const int M = grid.M();
  Complex interior{}, ends{};
  for (int j = 0; j < f.N(); ++j) {
    auto fe = f.edge(j);
    auto ge = g.edge(j);
    for (int i = 0; i < M - 1; ++i) interior += fe[i] * std::conj(ge[i]);
    ends += fe[M - 1] * std::conj(ge[M - 1]);
  }
  const double h = grid.h();
  return 0.5 * f.N() * h * f.vertex() * std::conj(g.vertex()) + h * interior + 0.5 * h * ends;
}

Complex derivative_pairing(const GraphFunction& f, const GraphFunction& g) {
  require_same(f, g);
  const int M = f.grid().M();
  Complex sum{};
  for (int j = 0; j < f.N(); ++j) {
    auto fe = f.edge(j);
    auto ge = g.edge(j);
    sum += (fe[0] - f.vertex()) * std::conj(ge[0] - g.vertex());
    for (int i = 1; i < M; ++i) sum += (fe[i] - fe[i - 1]) * std::conj(ge[i] - ge[i - 1]);
  }
  return sum / f.grid().h();
}

double l2_inner(const GraphFunction& f, const GraphFunction& g) { return l2_pairing(f, g).real(); }

double l2_norm(const GraphFunction& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

Complex x_pairing(const StateVector& A, const StateVector& B) {
  return l2_pairing(A.u, B.u) + derivative_pairing(A.u, B.u) + l2_pairing(A.v, B.v);
}

double x_inner(const StateVector& A, const StateVector& B) { return x_pairing(A, B).real(); }

double x_norm(const StateVector& U) { return std::sqrt(std::max(0.0, x_inner(U, U))); }

GraphFunction project_Lk(const GraphFunction& f, int k) {
  const int N = f.N();
  if (k < 0 || k > N - 1) throw DomainError("project_Xk needs 0 <= k <= N-1");
  GraphFunction out(N, f.grid());
  out.set_vertex(f.vertex());
  const int M = f.grid().M();
  auto average = [&](int first, int last) {
    const double inv = 1.0 / (last - first);
    for (int i = 1; i <= M; ++i) {
      Complex s{};
      for (int j = first; j < last; ++j) s += f.at(j, i);
      s *= inv;
      for (int j = first; j < last; ++j) out.at(j, i) = s;
    }
  };
  if (k == 0) {
    average(0, N);
  } else {
    average(0, k);
    average(k, N);
  }
  return out;
}

StateVector project_Xk(const StateVector& U, int k) { return {project_Lk(U.u, k), project_Lk(U.v, k)}; }

OrbitDistance distance_to_orbit(const StateVector& U, const StateVector& Phi) {
  if (!U.u.same_shape(Phi.u)) throw DimensionError("state and orbit live on different grids");
  const Complex c = x_pairing(U, Phi);
  if (std::abs(c) == 0.0) {
    if (x_norm(Phi) == 0.0) return {x_norm(U), 0.0};
    return {std::sqrt(x_inner(U, U) + x_inner(Phi, Phi)), 0.0};
  }
  const double theta = std::arg(c);
  const StateVector diff = U - std::polar(1.0, theta) * Phi;
  return {x_norm(diff), theta};
}

int chain_first_edge(const StarLayout& layout, int N, int k, int chain) {
  if (layout.chains == N) return chain;
  if (layout.chains == 1) return 0;
  return chain == 0 ? 0 : k;
}

int chain_edge_count(const StarLayout& layout, int N, int k, int chain) {
  if (layout.chains == N) return 1;
  if (layout.chains == 1) return N;
  return chain == 0 ? k : N - k;
}

Eigen::VectorXcd to_unknowns(const GraphFunction& f, const StarLayout& layout, int k) {
  if (layout.nodes != f.grid().M() - 1) throw DimensionError("layout does not match grid");
  Eigen::VectorXcd x(layout.block_dim());
  x[0] = f.vertex();
  for (int c = 0; c < layout.chains; ++c) {
    const int j = chain_first_edge(layout, f.N(), k, c);
    for (int i = 0; i < layout.nodes; ++i) x[layout.node(c, i)] = f.at(j, i + 1);
  }
  return x;
}

GraphFunction from_unknowns(const Eigen::VectorXcd& x, int N, const Grid& grid, const StarLayout& layout, int k) {
  if (x.size() != layout.block_dim() || layout.nodes != grid.M() - 1)
    throw DimensionError("unknown vector does not match layout");
  GraphFunction f(N, grid);
  f.set_vertex(x[0]);
  for (int c = 0; c < layout.chains; ++c) {
    const int first = chain_first_edge(layout, N, k, c);
    const int count = chain_edge_count(layout, N, k, c);
    for (int j = first; j < first + count; ++j)
      for (int i = 0; i < layout.nodes; ++i) f.at(j, i + 1) = x[layout.node(c, i)];
  }
  return f;
}

GraphFunction from_unknowns(const Eigen::VectorXd& x, int N, const Grid& grid, const StarLayout& layout, int k) {
  return from_unknowns(Eigen::VectorXcd(x.cast<Complex>()), N, grid, layout, k);
}

}  // namespace kggraph
