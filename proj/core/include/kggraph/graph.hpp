#pragma once

#include <complex>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kggraph/params.hpp"
#include "kggraph/star_matrix.hpp"

namespace kggraph {

using Complex = std::complex<double>;

/// Complex-valued function on the truncated star graph.
///
/// Continuity at the vertex is structural: every edge reads the single stored
/// vertex value.  Edge j stores nodes x_1 .. x_M; the x_M = L entry is kept for
/// quadrature but every operator treats it as zero.
class GraphFunction {
 public:
  GraphFunction(int N, const Grid& grid);

  /// Samples f(edge, x) at every node; the vertex value is f(0, 0).
  static GraphFunction sample(int N, const Grid& grid, const std::function<Complex(int, double)>& f);
  static GraphFunction constant(int N, const Grid& grid, Complex c);

  int N() const { return N_; }
  const Grid& grid() const { return grid_; }

  Complex vertex() const { return vertex_; }
  void set_vertex(Complex v) { vertex_ = v; }

  /// Node i of edge j, i = 1..M (0-based edge index).
  Complex& at(int edge, int i) { return values_[index(edge, i)]; }
  Complex at(int edge, int i) const { return values_[index(edge, i)]; }
  /// Like at() but i = 0 returns the vertex value.
  Complex value(int edge, int i) const { return i == 0 ? vertex_ : at(edge, i); }

  std::span<const Complex> edge(int j) const {
    return {values_.data() + static_cast<size_t>(j) * grid_.M(), static_cast<size_t>(grid_.M())};
  }
  const std::vector<Complex>& edge_values() const { return values_; }

  double max_abs_imag() const;
  double max_abs() const;
  bool same_shape(const GraphFunction& other) const { return N_ == other.N_ && grid_ == other.grid_; }

  GraphFunction& operator+=(const GraphFunction& o);
  GraphFunction& operator-=(const GraphFunction& o);
  GraphFunction& operator*=(Complex s);
  friend GraphFunction operator+(GraphFunction a, const GraphFunction& b) { return a += b; }
  friend GraphFunction operator-(GraphFunction a, const GraphFunction& b) { return a -= b; }
  friend GraphFunction operator*(Complex s, GraphFunction a) { return a *= s; }
  friend GraphFunction operator*(GraphFunction a, Complex s) { return a *= s; }

  bool operator==(const GraphFunction&) const = default;

 private:
  size_t index(int edge, int i) const { return static_cast<size_t>(edge) * grid_.M() + (i - 1); }

  int N_;
  Grid grid_;
  Complex vertex_{0.0, 0.0};
  std::vector<Complex> values_;
};

/// Phase-space point (u, v) with v standing for the time derivative of u.
struct StateVector {
  GraphFunction u;
  GraphFunction v;

  StateVector(GraphFunction u_, GraphFunction v_);
  static StateVector zero(int N, const Grid& grid) { return {GraphFunction(N, grid), GraphFunction(N, grid)}; }

  StateVector& operator+=(const StateVector& o);
  StateVector& operator-=(const StateVector& o);
  StateVector& operator*=(Complex s);
  friend StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
  friend StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
  friend StateVector operator*(Complex s, StateVector a) { return a *= s; }

  bool operator==(const StateVector&) const = default;
};

/// Standing-wave point (phi, i*omega*phi).
StateVector standing_wave_state(const GraphFunction& phi, double omega);

// --- quadrature ------------------------------------------------------------

/// Trapezoid weight of node i (0 = vertex, shared by all N edges).
double node_weight(const Grid& grid, int N, int i);

/// sum w f conj(g) over all nodes (complex, no real part taken).
Complex l2_pairing(const GraphFunction& f, const GraphFunction& g);
/// sum over elements of (f_e - f_{e-1}) conj(g_e - g_{e-1}) / h.
Complex derivative_pairing(const GraphFunction& f, const GraphFunction& g);

/// Re of the L2 pairing, the real Hilbert structure used throughout.
double l2_inner(const GraphFunction& f, const GraphFunction& g);
double l2_norm(const GraphFunction& f);

/// H1 pairing of the u parts plus L2 pairing of the v parts.
double x_inner(const StateVector& A, const StateVector& B);
Complex x_pairing(const StateVector& A, const StateVector& B);
double x_norm(const StateVector& U);

// --- symmetric subspaces ---------------------------------------------------

/// Orthogonal projection onto X_k: averages edges 1..k and edges k+1..N
/// (k = 0 averages all edges).
GraphFunction project_Lk(const GraphFunction& f, int k);
StateVector project_Xk(const StateVector& U, int k);

struct OrbitDistance {
  double distance;
  double theta;
};

/// min over theta of ||U - e^{i theta} Phi||_X and its minimizer.
OrbitDistance distance_to_orbit(const StateVector& U, const StateVector& Phi);

// --- bridge to operator unknowns ------------------------------------------

/// Unknown vector on `layout` (x = L dropped).  For symmetry-reduced layouts
/// the first edge of each group is read.
Eigen::VectorXcd to_unknowns(const GraphFunction& f, const StarLayout& layout, int k = 0);
/// Inverse of to_unknowns; the x = L entries are set to zero and reduced
/// chains are copied to every edge of their group.
GraphFunction from_unknowns(const Eigen::VectorXcd& x, int N, const Grid& grid, const StarLayout& layout, int k = 0);
GraphFunction from_unknowns(const Eigen::VectorXd& x, int N, const Grid& grid, const StarLayout& layout, int k = 0);

/// First edge index of chain c of a layout built by StarLayout::symmetric(N, k, M)
/// or StarLayout::full.
int chain_first_edge(const StarLayout& layout, int N, int k, int chain);
int chain_edge_count(const StarLayout& layout, int N, int k, int chain);

}  // namespace kggraph
