#include <catch2/catch_amalgamated.hpp>

#include "tikdyn/diagnostics.hpp"
#include "tikdyn/integrate.hpp"

using namespace tikdyn;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Phi = x1^2/2 in R^2, U = |x - (1,1)|^2/2
ProblemInstance quad_strong_u() {
  return build_problem({FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(2)),
                        FunctionSpec::shifted_sqnorm(vec2(1, 1))});
}

// Phi = U = x^2/2 in 1-D; gamma = 2, eps = 0: critically damped, closed form
// x(t) = e^{-t} (1 + t) from x(0) = 1, v(0) = 0.
ProblemInstance critically_damped_problem() {
  return build_problem({FunctionSpec::shifted_sqnorm(Vec::Zero(1)),
                        FunctionSpec::shifted_sqnorm(Vec::Zero(1))});
}

}  // namespace

TEST_CASE("dynamics_rhs on the pinned states") {
  auto p = build_problem({FunctionSpec::shifted_sqnorm(Vec::Zero(2)),
                          FunctionSpec::shifted_sqnorm(Vec::Zero(2))});
  auto g = DampingSchedule::constant(2.0, 0.0);
  auto e = TikhonovSchedule::power(1.0, 1.0);
  auto [dx, dv] = dynamics_rhs(p, g, e, {1.0, vec2(1, 0), vec2(0, 0)});
  CHECK(dx.norm() == 0.0);
  CHECK((dv - vec2(-2, 0)).norm() == 0.0);

  // at a minimizer with zero velocity and no Tikhonov term the field vanishes
  auto line = build_problem({FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(2)),
                             FunctionSpec::shifted_sqnorm(Vec::Zero(2))});
  auto [dx2, dv2] =
      dynamics_rhs(line, DampingSchedule::power(4.0, 1.0), TikhonovSchedule::zero(), {1.0, vec2(0, 3), vec2(0, 0)});
  CHECK(dx2.norm() == 0.0);
  CHECK(dv2.norm() == 0.0);

  // hand-evaluated cross-check
  auto p3 = quad_strong_u();
  auto g3 = DampingSchedule::power(4.0, 1.0, 2.0);
  auto e3 = TikhonovSchedule::power(1.0, 1.0, 2.0);
  auto [dx3, dv3] = dynamics_rhs(p3, g3, e3, {2.0, vec2(1, 1), vec2(1, -1)});
  CHECK((dx3 - vec2(1, -1)).norm() == 0.0);
  CHECK((dv3 - vec2(-3, 2)).norm() <= 1e-15);

  CHECK_THROWS_AS(dynamics_rhs(p3, g3, e3, {1.0, vec2(1, 1), vec2(0, 0)}), std::domain_error);
}

TEST_CASE("non-finite gradients are reported with the coordinate") {
  ProblemInstance p;
  p.dim = 2;
  p.phi.dim = 2;
  p.phi.eval = [](const Vec&) { return 0.0; };
  p.phi.grad = [](const Vec& x) -> Vec {
    Vec g = Vec::Zero(x.size());
    g[1] = std::numeric_limits<double>::quiet_NaN();
    return g;
  };
  p.u = p.phi;
  CHECK_THROWS_WITH(
      dynamics_rhs(p, DampingSchedule::constant(1.0, 0.0), TikhonovSchedule::zero(),
                   {0.0, vec2(0, 0), vec2(0, 0)}),
      Catch::Matchers::ContainsSubstring("coordinate 1"));
}

TEST_CASE("critically damped linear system matches its closed form") {
  auto p = critically_damped_problem();
  auto g = DampingSchedule::constant(2.0, 0.0);
  auto e = TikhonovSchedule::zero(0.0);
  State init{0.0, vec1(1), vec1(0)};

  IntegrateOptions opts;
  opts.t_end = 2.0;
  auto traj = integrate(p, g, e, init, opts);
  REQUIRE(traj.complete);
  const double exact = 3.0 * std::exp(-2.0);
  CHECK(traj.samples.back().state.x[0] == Catch::Approx(exact).margin(1e-6));
  CHECK(traj.samples.front().w_plain == Catch::Approx(0.5).margin(1e-15));

  auto ref = integrate_reference(p, g, e, init, 1e-4, 2.0);
  CHECK(ref.samples.back().state.x[0] == Catch::Approx(exact).margin(1e-9));
}

TEST_CASE("equilibrium initial data stays put") {
  auto line = build_problem({FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(2)),
                             FunctionSpec::shifted_sqnorm(Vec::Zero(2))});
  // x0 = 0 minimizes both Phi and U
  State init{1.0, Vec::Zero(2), Vec::Zero(2)};
  IntegrateOptions opts;
  opts.t_end = 1e3;
  auto traj = integrate(line, DampingSchedule::power(4.0, 1.0), TikhonovSchedule::power(1.0, 1.0),
                        init, opts);
  for (const auto& s : traj.samples) {
    REQUIRE(s.state.x.norm() <= 1e-9);
    REQUIRE(s.w_plain == 0.0);
    REQUIRE(s.w_full == 0.0);
  }
}

TEST_CASE("adaptive and fixed-step reference agree on the strong-U instance") {
  auto p = quad_strong_u();
  auto g = DampingSchedule::power(4.0, 1.0);
  auto e = TikhonovSchedule::power(1.0, 1.0);
  State init{1.0, vec2(1, 1), vec2(1, -1)};
  IntegrateOptions opts;
  opts.t_end = 100.0;
  auto adaptive = integrate(p, g, e, init, opts);
  auto reference = integrate_reference(p, g, e, init, 1e-3, 100.0);
  REQUIRE(adaptive.samples.size() == reference.samples.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < adaptive.samples.size(); ++k) {
    REQUIRE(adaptive.samples[k].state.t ==
            Catch::Approx(reference.samples[k].state.t).margin(1e-12));
    worst = std::max(worst,
                     (adaptive.samples[k].state.x - reference.samples[k].state.x).norm());
    worst = std::max(worst,
                     (adaptive.samples[k].state.v - reference.samples[k].state.v).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("reference integrator converges at fourth order under step halving") {
  auto p = quad_strong_u();
  auto g = DampingSchedule::power(4.0, 1.0);
  auto e = TikhonovSchedule::power(1.0, 1.0);
  State init{1.0, vec2(1, 1), vec2(1, -1)};
  auto end_state = [&](double step) {
    return integrate_reference(p, g, e, init, step, 10.0).samples.back().state.x;
  };
  const Vec x1 = end_state(1e-2);
  const Vec x2 = end_state(5e-3);
  const Vec x3 = end_state(2.5e-3);
  const double d1 = (x1 - x2).norm();
  const double d2 = (x2 - x3).norm();
  REQUIRE(d2 > 0.0);
  // fourth order: each halving divides the error by ~16
  CHECK(d1 / d2 == Catch::Approx(16.0).margin(4.0));
  CHECK(d1 <= 16.0 * d2 * 1.3);
}

TEST_CASE("step budget exhaustion flags the trajectory incomplete") {
  auto p = quad_strong_u();
  IntegrateOptions opts;
  opts.t_end = 1e4;
  opts.max_steps = 25;
  auto traj = integrate(p, DampingSchedule::power(4.0, 1.0), TikhonovSchedule::power(1.0, 1.0),
                        {1.0, vec2(1, 1), Vec::Zero(2)}, opts);
  CHECK_FALSE(traj.complete);
  CHECK(traj.samples.back().state.t < 1e4);
}

TEST_CASE("runaway trajectories raise a blow-up error with the last good state") {
  // deliberately concave "potential": the flow is repelled to infinity
  ProblemInstance p;
  p.dim = 1;
  p.phi.dim = 1;
  p.phi.eval = [](const Vec& x) { return -0.5 * x.squaredNorm(); };
  p.phi.grad = [](const Vec& x) -> Vec { return -x; };
  p.phi.inf_value = Infimum::unknown();
  p.u = p.phi;
  State init{0.0, vec1(1), vec1(0)};
  IntegrateOptions opts;
  opts.t_end = 5000.0;
  try {
    integrate(p, DampingSchedule::constant(1.0, 0.0), TikhonovSchedule::zero(0.0), init, opts);
    FAIL("expected BlowUpError");
  } catch (const BlowUpError& ex) {
    CHECK(ex.last_good.x.allFinite());
    CHECK(ex.last_good.t > 0.0);
    REQUIRE(ex.partial_trajectory != nullptr);
    CHECK_FALSE(ex.partial_trajectory->complete);
  }
}

TEST_CASE("absurd gradient scales trip the step floor") {
  ProblemInstance p;
  p.dim = 1;
  p.phi.dim = 1;
  p.phi.eval = [](const Vec& x) { return 1e30 * x.cwiseAbs().sum(); };
  p.phi.grad = [](const Vec& x) -> Vec {
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i) g[i] = x[i] >= 0 ? 1e30 : -1e30;
    return g;
  };
  p.phi.inf_value = Infimum::unknown();
  p.u = p.phi;
  IntegrateOptions opts;
  opts.t_end = 10.0;
  auto traj = integrate(p, DampingSchedule::constant(1.0, 0.0), TikhonovSchedule::zero(0.0),
                        {0.0, vec1(1), vec1(0)}, opts);
  CHECK(traj.stiff_abort);
  CHECK_FALSE(traj.complete);
}

TEST_CASE("integration preconditions") {
  auto p = quad_strong_u();
  IntegrateOptions opts;
  opts.t_end = 10.0;
  CHECK_THROWS_AS(integrate(p, DampingSchedule::power(4.0, 1.0), TikhonovSchedule::zero(),
                            {2.0, vec2(1, 1), Vec::Zero(2)}, opts),
                  InvalidSpec);
  CHECK_THROWS_AS(integrate_reference(p, DampingSchedule::power(4.0, 1.0),
                                      TikhonovSchedule::zero(), {1.0, vec2(1, 1), Vec::Zero(2)},
                                      0.5, 10.0),
                  InvalidSpec);
}

TEST_CASE("log sampling grid covers the interval at the requested density") {
  auto grid = log_sample_grid(1.0, 1e4, 50);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == 1e4);
  CHECK(grid.size() == 201);
  for (std::size_t k = 1; k < grid.size(); ++k) REQUIRE(grid[k] > grid[k - 1]);

  auto from_zero = log_sample_grid(0.0, 2.0, 50);
  CHECK(from_zero.front() == 0.0);
  CHECK(from_zero.back() == 2.0);
}

TEST_CASE("unknown infima are estimated from the trajectory and flagged") {
  ProblemInstance p;
  p.dim = 1;
  p.phi.dim = 1;
  p.phi.eval = [](const Vec& x) { return 0.5 * x.squaredNorm() + 1.0; };
  p.phi.grad = [](const Vec& x) -> Vec { return x; };
  p.phi.inf_value = Infimum::unknown();  // true infimum is 1, reached at 0
  p.u.dim = 1;
  p.u.eval = [](const Vec&) { return 0.0; };
  p.u.grad = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  p.u.inf_value = Infimum::attained(0.0);
  IntegrateOptions opts;
  opts.t_end = 200.0;
  auto traj = integrate(p, DampingSchedule::constant(2.0, 0.0), TikhonovSchedule::zero(0.0),
                        {0.0, vec1(1), vec1(0)}, opts);
  CHECK(traj.estimated_infimum);
  CHECK(traj.phi_star == Catch::Approx(1.0).margin(1e-4));
  CHECK(traj.samples.back().w_plain >= 0.0);
}
