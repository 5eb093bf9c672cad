#include "kggraph/params.hpp"

#include <cmath>
#include <sstream>

#include "kggraph/errors.hpp"

namespace kggraph {

void PhysParams::validate() const {
  if (N < 2) throw DomainError("N must be at least 2 (got " + std::to_string(N) + ")");
  if (!(m > 0.0)) throw DomainError("m must be positive");
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  if (k < 0) throw DomainError("k must be non-negative");
  if (k > max_k()) {
    std::ostringstream os;
    os << "k exceeds floor((N-1)/2): k = " << k << ", N = " << N << ", floor((N-1)/2) = " << max_k();
    throw DomainError(os.str());
  }
  if (!std::isfinite(alpha) || !std::isfinite(omega)) throw DomainError("alpha and omega must be finite");
}

std::optional<std::string> PhysParams::profile_violation() const {
  const double g = gap();
  const double denom = static_cast<double>(N - 2 * k);
  const double bound = alpha * alpha / (denom * denom);
  if (g > bound) return std::nullopt;
  std::ostringstream os;
  os.precision(17);
  os << "profile existence requires m^2 - omega^2 > alpha^2/(N-2k)^2, got " << g << " <= " << bound;
  return os.str();
}

void PhysParams::validate_profile() const {
  validate();
  if (auto why = profile_violation()) throw DomainError(*why);
}

Grid::Grid(double L, int M) : L_(L), M_(M), h_(L / M) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("grid length L must be positive");
  if (M < 8) throw DomainError("grid needs at least 8 points per edge (got M = " + std::to_string(M) + ")");
}

double Grid::default_length(const PhysParams& params, double decay_lengths) {
  const double g = params.gap();
  if (!(g > 0.0)) throw DomainError("default truncation needs m^2 - omega^2 > 0");
  return decay_lengths / std::sqrt(g);
}

Grid Grid::for_params(const PhysParams& params, int M, double decay_lengths) {
  return Grid(default_length(params, decay_lengths), M);
}

Grid GridSpec::make(const PhysParams& params) const {
  return L ? Grid(*L, M) : Grid::for_params(params, M, decay_lengths);
}

}  // namespace kggraph
