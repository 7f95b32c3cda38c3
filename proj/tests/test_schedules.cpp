#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tikdyn/schedules.hpp"

using namespace tikdyn;

TEST_CASE("closed-form schedule values and derivatives") {
  auto g = DampingSchedule::power(4.0, 1.0);
  CHECK(g.value(2.0) == Catch::Approx(2.0).margin(0));
  CHECK(g.derivative(2.0) == Catch::Approx(-1.0).margin(0));

  auto e = TikhonovSchedule::power(1.0, 3.0);
  CHECK(e.value(10.0) == Catch::Approx(0.001).epsilon(1e-15));
  CHECK(e.derivative(10.0) == Catch::Approx(-0.0003).epsilon(1e-15));

  auto c = DampingSchedule::constant(2.0);
  CHECK(c.value(100.0) == 2.0);
  CHECK(c.derivative(100.0) == 0.0);

  CHECK_THROWS_AS(g.value(0.5), std::domain_error);
  CHECK_THROWS_AS(e.derivative(0.5), std::domain_error);
}

TEST_CASE("schedule constructors validate their parameters") {
  CHECK_THROWS_AS(DampingSchedule::power(-1.0, 1.0), InvalidSpec);
  CHECK_THROWS_AS(DampingSchedule::power(4.0, 1.5), InvalidSpec);
  CHECK_THROWS_AS(DampingSchedule::power(4.0, 1.0, 0.5), InvalidSpec);
  CHECK_THROWS_AS(DampingSchedule::constant(0.0), InvalidSpec);
  CHECK_THROWS_AS(DampingSchedule::perturbed_power(4.0, 1.0, 1.0, 0.5), InvalidSpec);
  // negative perturbation large enough to kill positivity at t0
  CHECK_THROWS_AS(DampingSchedule::perturbed_power(1.0, 1.0, -2.0, 2.0), InvalidSpec);
  CHECK_THROWS_AS(TikhonovSchedule::power(0.0, 1.0), InvalidSpec);
  CHECK_THROWS_AS(TikhonovSchedule::power(1.0, -1.0), InvalidSpec);
}

TEST_CASE("H4 and the damping assumption for gamma = 4/t") {
  auto h = check_damping_hypotheses(DampingSchedule::power(4.0, 1.0), 1.0, 4.0);
  CHECK(h.h4_ok);
  CHECK(h.k1 == Catch::Approx(4.0));
  CHECK(h.lower_bound_ok);
  CHECK(h.positive_part_integrable);
  CHECK(h.positive_part_integral == 0.0);  // (t*gamma)' vanishes identically
  CHECK(h.assump_ok);
  CHECK(alpha_gate_holds(1.0, 4.0));
  CHECK_FALSE(alpha_gate_holds(1.0, 3.0));
}

TEST_CASE("t^theta gamma constant along the family keeps the assumption") {
  auto h = check_damping_hypotheses(DampingSchedule::power(2.0, 0.5), 0.5, 2.0);
  CHECK(h.assump_ok);
  CHECK(h.positive_part_integral == 0.0);
}

TEST_CASE("perturbed damping 4/t + 1/t^2 has vanishing positive part") {
  auto g = DampingSchedule::perturbed_power(4.0, 1.0, 1.0, 2.0);
  CHECK(g.value(2.0) == Catch::Approx(2.25));
  auto h = check_damping_hypotheses(g, 1.0, 4.0);
  // (t*gamma)' = -1/t^2 <= 0
  CHECK(h.positive_part_integrable);
  CHECK(h.positive_part_integral == 0.0);
  CHECK(h.lower_bound_ok);  // 4 + 1/t >= 4
  CHECK(h.assump_ok);
}

TEST_CASE("negative perturbation: integrable positive part but failed lower bound at alpha") {
  auto g = DampingSchedule::perturbed_power(4.0, 1.0, -1.0, 2.0);
  auto h = check_damping_hypotheses(g, 1.0, 4.0);
  // (t*gamma)' = +1/t^2, integral over [1, inf) equals 1
  CHECK(h.positive_part_integrable);
  CHECK(h.positive_part_integral == Catch::Approx(1.0));
  CHECK_FALSE(h.lower_bound_ok);  // 4 - 1/t < 4 for all t
  CHECK_FALSE(h.assump_ok);

  auto h2 = check_damping_hypotheses(g, 1.0, 3.9);
  CHECK(h2.lower_bound_ok);
  CHECK(h2.assump_ok);
}

TEST_CASE("theta mismatched against the family breaks the assumption") {
  // gamma = 4/t with theta = 1/2: integral part fine, lower bound decays to 0
  auto h = check_damping_hypotheses(DampingSchedule::power(4.0, 1.0), 0.5, 1.0);
  CHECK_FALSE(h.lower_bound_ok);
  CHECK_FALSE(h.assump_ok);
  // gamma = 2/sqrt(t) with theta = 1: (t^theta gamma)' ~ t^{-1/2} is not integrable
  auto h2 = check_damping_hypotheses(DampingSchedule::power(2.0, 0.5), 1.0, 2.0);
  CHECK(h2.lower_bound_ok);
  CHECK_FALSE(h2.positive_part_integrable);
  CHECK_FALSE(h2.assump_ok);
}

TEST_CASE("constant damping satisfies the assumption only at theta = 0") {
  auto h0 = check_damping_hypotheses(DampingSchedule::constant(2.0), 0.0, 2.0);
  CHECK(h0.assump_ok);
  auto h1 = check_damping_hypotheses(DampingSchedule::constant(2.0), 0.5, 2.0);
  CHECK_FALSE(h1.positive_part_integrable);
}

TEST_CASE("regime classification for the pinned schedules") {
  auto g = DampingSchedule::power(4.0, 1.0);
  auto r1 = classify_regime(g, TikhonovSchedule::power(1.0, 3.0), 1.0);
  CHECK(r1.p1);
  CHECK_FALSE(r1.p2);
  CHECK_FALSE(r1.strong);
  CHECK(r1.h4_ok);
  CHECK(r1.assump_ok);
  CHECK(r1.alpha_gate);

  auto r2 = classify_regime(g, TikhonovSchedule::power(1.0, 2.0), 1.0);
  CHECK_FALSE(r2.p1);
  CHECK(r2.p2);
  CHECK(r2.strong);
  CHECK(r2.witnesses.at("liminf_t1ptheta_eps") == Catch::Approx(1.0));

  auto r3 = classify_regime(g, TikhonovSchedule::power(1.0, 1.0), 1.0);
  CHECK(r3.strong);
  CHECK_FALSE(r3.p1);
  CHECK(r3.p2);
  CHECK(std::isinf(r3.witnesses.at("liminf_t1ptheta_eps")));

  auto rz = classify_regime(g, TikhonovSchedule::zero(), 1.0);
  CHECK(rz.p1);
  CHECK_FALSE(rz.p2);
  CHECK_FALSE(rz.strong);
}

TEST_CASE("schedule derivatives match finite differences at random times") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> logt(0.1, 6.0);
  std::vector<DampingSchedule> gs = {DampingSchedule::power(4.0, 1.0),
                                     DampingSchedule::power(2.0, 0.5),
                                     DampingSchedule::constant(2.0),
                                     DampingSchedule::perturbed_power(4.0, 1.0, 1.0, 2.0)};
  for (const auto& g : gs) {
    for (int trial = 0; trial < 100; ++trial) {
      const double t = std::pow(10.0, logt(rng));
      const double h = 1e-5 * t;
      const double fd = (g.value(t + h) - g.value(t - h)) / (2.0 * h);
      REQUIRE(std::abs(fd - g.derivative(t)) <= 1e-6 * (1.0 + std::abs(g.derivative(t))));
    }
  }
  auto e = TikhonovSchedule::power(0.7, 1.6);
  for (int trial = 0; trial < 100; ++trial) {
    const double t = std::pow(10.0, logt(rng));
    const double h = 1e-5 * t;
    const double fd = (e.value(t + h) - e.value(t - h)) / (2.0 * h);
    REQUIRE(std::abs(fd - e.derivative(t)) <= 1e-6 * (1.0 + std::abs(e.derivative(t))));
  }
}

TEST_CASE("regime flags equal the analytic power-law predicates exactly") {
  std::mt19937_64 rng(20250810);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> up(0.05, 3.5);
  std::uniform_real_distribution<double> uc(0.1, 10.0);
  std::uniform_real_distribution<double> ua(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = u01(rng);
    const double p = up(rng);
    const double c = uc(rng);
    const double alpha = ua(rng);
    auto g = DampingSchedule::power(alpha, theta);
    auto e = TikhonovSchedule::power(c, p);
    auto r = classify_regime(g, e, theta);
    REQUIRE(r.p1 == (p > 1.0 + theta));
    REQUIRE(r.p2 == (p <= 1.0 + theta));
    REQUIRE(r.strong == (p <= 1.0 + theta));
    REQUIRE(r.alpha_gate == (theta == 1.0 ? alpha > 3.0 : alpha > 0.0));
    // Abstract-form control condition: eps/gamma = (c/alpha) t^{theta-p}
    const bool eps_over_gamma_diverges = theta - p >= -1.0;
    REQUIRE(r.strong == eps_over_gamma_diverges);
  }
  // the alpha gate at theta = 1 warns below the critical value
  auto r = classify_regime(DampingSchedule::power(3.0, 1.0), TikhonovSchedule::power(1.0, 2.0),
                           1.0);
  CHECK_FALSE(r.alpha_gate);
  REQUIRE_FALSE(r.notes.empty());
}

TEST_CASE("numerical fallback agrees with the symbolic classification") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> up(0.1, 3.0);
  int tested = 0;
  while (tested < 20) {
    const double theta = u01(rng);
    const double p = up(rng);
    if (std::abs(p - (1.0 + theta)) < 0.05) continue;  // keep away from the boundary
    ++tested;
    auto g = DampingSchedule::power(4.0, theta);
    auto e = TikhonovSchedule::power(1.0, p);
    auto symbolic = classify_regime(g, e, theta);
    auto numerical = classify_regime_numerical(
        g, [&](double t) { return e.value(t); }, theta, 1.0);
    REQUIRE(numerical.numerical);
    REQUIRE(numerical.p1 == symbolic.p1);
    REQUIRE(numerical.strong == symbolic.strong);
  }

  // damping fallback on a catalog family, checked against the closed form
  auto g = DampingSchedule::perturbed_power(4.0, 1.0, -1.0, 2.0);
  auto symbolic = check_damping_hypotheses(g, 1.0, 3.9);
  auto numerical = check_damping_hypotheses_numerical(
      [&](double t) { return g.value(t); }, [&](double t) { return g.derivative(t); }, 1.0, 3.9,
      g.t0);
  CHECK(numerical.numerical);
  CHECK(numerical.positive_part_integrable == symbolic.positive_part_integrable);
  CHECK(numerical.positive_part_integral ==
        Catch::Approx(symbolic.positive_part_integral).epsilon(1e-3));
  CHECK(numerical.lower_bound_ok == symbolic.lower_bound_ok);
}
