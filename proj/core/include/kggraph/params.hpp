#pragma once

#include <optional>
#include <string>

namespace kggraph {

/// Model parameters of the Klein-Gordon equation on an N-edge star graph.
///
/// `k` selects the stationary profile: edges 1..k carry the shifted bump,
/// edges k+1..N the shifted tail.
struct PhysParams {
  int N = 3;
  double alpha = 0.0;
  double m = 1.0;
  double omega = 0.0;
  double p = 2.0;
  int k = 0;

  /// m^2 - omega^2, the spectral gap of the linear part.
  double gap() const { return m * m - omega * omega; }
  int max_k() const { return (N - 1) / 2; }

  /// Structural checks only: N >= 2, m > 0, p > 1, 0 <= k <= floor((N-1)/2).
  void validate() const;

  /// validate() plus m^2 - omega^2 > alpha^2 / (N - 2k)^2.
  void validate_profile() const;

  /// Empty when the profile exists, otherwise the violated inequality.
  std::optional<std::string> profile_violation() const;
  bool profile_exists() const { return !profile_violation().has_value(); }

  bool operator==(const PhysParams&) const = default;
};

/// Uniform grid shared by all edges: nodes x_i = i*h, i = 0..M, with x_M = L
/// carrying a homogeneous Dirichlet condition.
class Grid {
 public:
  Grid(double L, int M);

  /// L = decay_lengths / sqrt(m^2 - omega^2), the default truncation.
  static Grid for_params(const PhysParams& params, int M, double decay_lengths = 40.0);
  static double default_length(const PhysParams& params, double decay_lengths = 40.0);

  double L() const { return L_; }
  int M() const { return M_; }
  double h() const { return h_; }
  double x(int i) const { return i * h_; }

  /// Same grid with M doubled (h halved).
  Grid refined() const { return Grid(L_, 2 * M_); }

  bool operator==(const Grid& other) const { return L_ == other.L_ && M_ == other.M_; }

 private:
  double L_;
  int M_;
  double h_;
};

/// Grid recipe used where each parameter point needs its own truncation.
struct GridSpec {
  int M = 6000;
  std::optional<double> L;
  double decay_lengths = 40.0;

  Grid make(const PhysParams& params) const;
};

}  // namespace kggraph
