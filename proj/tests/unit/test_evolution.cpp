#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "kggraph/conserved.hpp"
#include "kggraph/errors.hpp"
#include "kggraph/evolution.hpp"
#include "kggraph/operators.hpp"
#include "kggraph/profiles.hpp"
#include "kggraph/stability.hpp"
#include "test_support.hpp"

using namespace kggraph;
using kggraph::testing::point;

namespace {

/// 1/2 <A u, u> + 1/2 <M v, v> with A = K_alpha + m^2 M, the invariant of the
/// linear part.
double linear_energy(const StateVector& U, const PhysParams& q) {
  const Grid& g = U.u.grid();
  const StarLayout layout = StarLayout::full(q.N, g.M());
  const Eigen::VectorXd mass = lumped_mass(layout, g);
  const StarMatrix A = form_stiffness(layout, g, q.alpha).plus_diagonal(mass, q.m * q.m);
  const Eigen::VectorXcd u = to_unknowns(U.u, layout);
  const Eigen::VectorXcd v = to_unknowns(U.v, layout);
  return 0.5 * u.dot(A.apply(u)).real() + 0.5 * (mass.array() * v.array().abs2()).sum();
}

EvolveConfig config(double dt, double T) {
  EvolveConfig c;
  c.dt = dt;
  c.T = T;
  return c;
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("config validation") {
    CHECK_THROWS_AS(config(0.0, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(config(-1e-3, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(config(0.1, 0.01).validate(), DomainError);
    EvolveConfig c = config(1e-2, 1.0);
    c.record_every = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = config(1e-2, 1.0);
    c.snapshot_every = -1;
    CHECK_THROWS_AS(c.validate(), DomainError);
    CHECK(config(1e-2, 1.0).steps() == 100);
    CHECK(config(0.3, 1.0).steps() == 4);
    CHECK_THROWS_AS(LinearPropagator(point(3, 0, 0.0, 0.0), Grid(5.0, 20), 0.0), DomainError);
  }

  TEST_CASE("Crank-Nicolson conserves the linear energy") {
    std::mt19937_64 rng(1);
    const PhysParams q = point(3, 0, -0.7, 0.0);
    const Grid g(5.0, 50);
    StateVector U = testing::random_state(3, g, rng);
    const double e0 = linear_energy(U, q);
    const LinearPropagator P(q, g, 0.05);
    for (int s = 0; s < 200; ++s) U = P.apply(U);
    CHECK(linear_energy(U, q) == doctest::Approx(e0).epsilon(1e-12));
  }

  TEST_CASE("eigenmode phase error is second order in dt") {
    const PhysParams q = point(3, 0, 0.4, 0.0);
    const Grid g(4.0, 20);
    const StarLayout layout = StarLayout::full(3, g.M());
    const Eigen::VectorXd mass = lumped_mass(layout, g);
    const StarMatrix A = form_stiffness(layout, g, q.alpha).plus_diagonal(mass, 1.0);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(A.to_sparse()),
                                                                  Eigen::MatrixXd(mass.asDiagonal()));
    const Eigen::VectorXd x = es.eigenvectors().col(2);
    const double freq = std::sqrt(es.eigenvalues()[2]);
    const GraphFunction mode = from_unknowns(x, 3, g, layout);

    auto error = [&](double dt) {
      const LinearPropagator P(q, g, dt);
      StateVector U{mode, GraphFunction(3, g)};
      const int n = static_cast<int>(std::lround(1.0 / dt));
      for (int s = 0; s < n; ++s) U = P.apply(U);
      // Exact: u(t) = cos(freq t) x, v(t) = -freq sin(freq t) x.
      const StateVector exact{Complex(std::cos(freq)) * mode, Complex(-freq * std::sin(freq)) * mode};
      return x_norm(U - exact);
    };
    const double e1 = error(0.02);
    const double e2 = error(0.01);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("nonlinear kick") {
    std::mt19937_64 rng(2);
    const PhysParams q = point(3, 0, 0.0, 0.0, 1.0, 3.0);
    const Grid g(3.0, 12);
    const StateVector U = testing::random_state(3, g, rng);
    const StateVector K = step_nonlinear(U, 0.1, q);
    CHECK(K.u == U.u);
    const Complex z = U.u.at(1, 4);
    CHECK(std::abs(K.v.at(1, 4) - (U.v.at(1, 4) + 0.1 * std::norm(z) * z)) < 1e-15);
    const StateVector back = step_nonlinear(K, -0.1, q);
    CHECK(x_norm(back - U) < 1e-14 * x_norm(U));
  }

  TEST_CASE("Strang step is time-reversible") {
    std::mt19937_64 rng(3);
    const PhysParams q = point(3, 1, 0.5, 0.3);
    const Grid g(10.0, 60);
    const StateVector U = testing::random_state(3, g, rng);
    const LinearPropagator fwd(q, g, 0.01);
    const LinearPropagator bwd(q, g, -0.01);
    const StateVector V = strang_step(strang_step(U, fwd, q), bwd, q);
    CHECK(x_norm(V - U) < 1e-12 * x_norm(U));
    CHECK(x_norm(bwd.apply(fwd.apply(U)) - U) < 1e-12 * x_norm(U));
  }

  TEST_CASE("gauge equivariance") {
    std::mt19937_64 rng(4);
    const PhysParams q = point(3, 0, -0.2, 0.0);
    const Grid g(8.0, 40);
    const StateVector U = Complex(0.3) * testing::random_state(3, g, rng);
    const Complex rot = std::polar(1.0, 0.9);
    const auto a = evolve(U, config(0.01, 0.5), q, g);
    const auto b = evolve(rot * U, config(0.01, 0.5), q, g);
    CHECK(x_norm(b.final_state() - rot * a.final_state()) < 1e-12 * x_norm(a.final_state()));
    for (size_t i = 0; i < a.energy_series.size(); ++i) {
      CHECK(b.energy_series[i] == doctest::Approx(a.energy_series[i]).epsilon(1e-12));
      CHECK(b.charge_series[i] == doctest::Approx(a.charge_series[i]).epsilon(1e-10));
    }
  }

  TEST_CASE("standing wave stays on its orbit") {
    // A stable point: at an unstable one roundoff grows exponentially along the flow.
    const PhysParams q = point(3, 0, -0.5, 0.9);
    const Grid g = Grid::for_params(q, 600);
    const StateVector S = standing_wave_state(discrete_profile(q, g), q.omega);
    auto run = [&](double dt, double& phase_error) {
      const Trajectory tr = evolve(S, config(dt, 5.0), q, g, S);
      REQUIRE(tr.orbit_distance.size() == tr.times.size());
      CHECK(tr.orbit_distance.front() < 1e-13);
      const OrbitDistance od = distance_to_orbit(tr.final_state(), S);
      phase_error = std::abs(std::remainder(od.theta - q.omega * 5.0, 2 * M_PI));
      return *std::max_element(tr.orbit_distance.begin(), tr.orbit_distance.end());
    };
    double p1 = 0.0, p2 = 0.0;
    const double d1 = run(0.01, p1);
    const double d2 = run(0.005, p2);
    CHECK(d1 < 1e-5 * x_norm(S));
    CHECK(p1 < 1e-4);
    // Splitting error is second order in dt for both the shape and the phase.
    CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(p1 / p2 == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("trajectory bookkeeping and energy drift") {
    const PhysParams q = point(3, 0, -0.5, 0.9);
    const Grid g = Grid::for_params(q, 300);
    const StateVector U =
        standing_wave_state(discrete_profile(q, g), q.omega) +
        Complex(1e-2) * perturbation_direction(q, g, PerturbationDirection::Generic);
    EvolveConfig c = config(0.02, 2.0);
    c.record_every = 10;
    c.snapshot_every = 2;
    const Trajectory tr = evolve(U, c, q, g, U);
    CHECK(tr.terminated == Termination::Completed);
    CHECK(tr.steps_taken == 100);
    CHECK(tr.times.size() == 11);
    CHECK(tr.times.back() == doctest::Approx(2.0));
    CHECK(tr.snapshot_times.size() == tr.states.size());
    const std::vector<double> expected{0.0, 0.4, 0.8, 1.2, 1.6, 2.0};
    REQUIRE(tr.snapshot_times.size() == expected.size());
    for (size_t i = 0; i < expected.size(); ++i) CHECK(tr.snapshot_times[i] == doctest::Approx(expected[i]));
    for (size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);

    CHECK(tr.energy_series.front() == doctest::Approx(energy(U, q)).epsilon(1e-12));
    CHECK(tr.charge_series.front() == doctest::Approx(charge(U)).epsilon(1e-12));
    CHECK(tr.x_norm_series.front() == doctest::Approx(x_norm(U)).epsilon(1e-12));
    for (double e : tr.energy_series) CHECK(e == doctest::Approx(tr.energy_series.front()).epsilon(1e-3));
  }

  TEST_CASE("blow-up ends the run without an error") {
    const PhysParams q = point(3, 0, 0.0, 0.0);
    const Grid g(20.0, 200);
    const StateVector U{Complex(3.0) * build_profile(q, g), GraphFunction(3, g)};
    CHECK(energy(U, q) < 0.0);
    EvolveConfig c = config(1e-3, 20.0);
    c.blowup_norm = 1e3;
    const Trajectory tr = evolve(U, c, q, g);
    CHECK(tr.terminated == Termination::BlowUp);
    CHECK(tr.x_norm_series.back() > 1e3);
    CHECK(tr.steps_taken < c.steps());
  }

  TEST_CASE("non-finite states are reported with their step") {
    const PhysParams q = point(3, 0, 0.0, 0.0);
    const Grid g(5.0, 20);
    StateVector U = StateVector::zero(3, g);
    U.u.at(0, 3) = std::numeric_limits<double>::quiet_NaN();
    try {
      evolve(U, config(0.1, 1.0), q, g);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    }
    CHECK_THROWS_AS(evolve(StateVector::zero(3, Grid(5.0, 40)), config(0.1, 1.0), q, g), DimensionError);
  }

  TEST_CASE("X_k is invariant under the flow") {
    std::mt19937_64 rng(6);
    const PhysParams q = point(5, 2, 0.3, 0.5);
    const Grid g(15.0, 150);
    const StateVector S = standing_wave_state(discrete_profile(q, g), q.omega);
    const StateVector W = testing::random_state(5, g, rng);
    const StateVector inside = S + Complex(0.05) * project_Xk(W, 2);
    CHECK(check_Xk_invariance(inside, config(0.02, 2.0), q, g, 2) < 1e-12);
    const StateVector outside = S + Complex(0.05) * W;
    CHECK(check_Xk_invariance(outside, config(0.02, 2.0), q, g, 2) > 1e-3);
    CHECK_THROWS_AS(check_Xk_invariance(inside, config(0.02, 2.0), q, g, 5), DomainError);
  }
}
