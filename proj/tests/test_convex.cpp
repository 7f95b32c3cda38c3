#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tikdyn/convex.hpp"

using namespace tikdyn;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<ConvexFunction> catalog_functions() {
  std::vector<ConvexFunction> fns;
  Mat q5 = Mat::Zero(5, 5);
  q5.diagonal() << 1.0, 0.1, 0.01, 1.0, 1.0;
  fns.push_back(make_catalog_function(FunctionSpec::quadratic(q5, Vec::Zero(5))).fn);
  fns.push_back(make_catalog_function(FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(2))).fn);
  Mat a(3, 2);
  a << 1, 0, 1, 0, 0, 0;
  Vec b(3);
  b << 1, 1, 0;
  fns.push_back(make_catalog_function(FunctionSpec::least_squares(a, b)).fn);
  fns.push_back(make_catalog_function(FunctionSpec::logsumexp_softplus(3)).fn);
  fns.push_back(make_catalog_function(FunctionSpec::shifted_sqnorm(vec2(1, 1))).fn);
  return fns;
}

Vec random_in_ball(std::mt19937_64& rng, int dim, double radius = 1.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  v *= radius * std::pow(unif(rng), 1.0 / dim) / v.norm();
  return v;
}

}  // namespace

TEST_CASE("quadratic with a flat direction has an affine argmin") {
  auto p = build_problem({FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(2)),
                          FunctionSpec::shifted_sqnorm(vec2(1, 1))});
  REQUIRE(p.s_phi.kind == ArgminSet::Kind::affine);
  CHECK(p.s_phi.anchor.norm() < 1e-12);
  REQUIRE(p.s_phi.basis.cols() == 1);
  CHECK(std::abs(p.s_phi.basis.col(0).dot(vec2(0, 1))) == Catch::Approx(1.0).margin(1e-12));
  CHECK(p.phi.inf_value.value == Catch::Approx(0.0).margin(1e-15));
  // p_star: projection of (1,1) onto {x1 = 0}
  REQUIRE(p.p_star.has_value());
  CHECK((*p.p_star - vec2(0, 1)).norm() < 1e-10);
  REQUIRE(p.x_star.has_value());
  CHECK((*p.x_star - vec2(1, 1)).norm() < 1e-12);
}

TEST_CASE("shifted_sqnorm knows its unique minimizer") {
  auto entry = make_catalog_function(FunctionSpec::shifted_sqnorm(vec2(1, 1)));
  CHECK(entry.argmin.kind == ArgminSet::Kind::single_point);
  CHECK((entry.argmin.anchor - vec2(1, 1)).norm() == 0.0);
  CHECK(entry.fn.inf_value.value == 0.0);
  CHECK(entry.fn.strong_convexity_modulus == 1.0);
}

TEST_CASE("softplus has an empty argmin and an unattained infimum of zero") {
  auto entry = make_catalog_function(FunctionSpec::logsumexp_softplus(1));
  CHECK(entry.argmin.kind == ArgminSet::Kind::empty);
  CHECK(entry.fn.inf_value.kind == Infimum::Kind::unattained);
  CHECK(entry.fn.inf_value.value == 0.0);
  Vec x(1);
  x << 0.0;
  CHECK(entry.fn.eval(x) == Catch::Approx(std::log(2.0)));
}

TEST_CASE("invalid problem descriptors are rejected") {
  CHECK_THROWS_AS(make_catalog_function(FunctionSpec::quadratic(diag2(1, -0.5), Vec::Zero(2))),
                  InvalidSpec);
  CHECK_THROWS_AS(make_catalog_function(FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(3))),
                  InvalidSpec);
  Mat ns(2, 2);
  ns << 1, 0.5, 0, 1;  // not symmetric
  CHECK_THROWS_AS(make_catalog_function(FunctionSpec::quadratic(ns, Vec::Zero(2))), InvalidSpec);
  // linear term along a null direction: unbounded below
  CHECK_THROWS_AS(make_catalog_function(FunctionSpec::quadratic(diag2(1, 0), vec2(0, 1))),
                  InvalidSpec);
  CHECK_THROWS_AS(build_problem({FunctionSpec::logsumexp_softplus(2),
                                 FunctionSpec::shifted_sqnorm(Vec::Zero(3))}),
                  InvalidSpec);
}

TEST_CASE("least_squares argmin is the solution set of the normal equations") {
  Mat a(3, 2);
  a << 1, 0, 1, 0, 0, 0;
  Vec b(3);
  b << 1, 1, 0;
  auto entry = make_catalog_function(FunctionSpec::least_squares(a, b));
  REQUIRE(entry.argmin.kind == ArgminSet::Kind::affine);
  CHECK((entry.argmin.anchor - vec2(1, 0)).norm() < 1e-10);
  CHECK(entry.fn.inf_value.value == Catch::Approx(0.0).margin(1e-14));
  CHECK(std::abs(entry.argmin.basis.col(0).dot(vec2(0, 1))) ==
        Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("check_gradient on the pinned examples") {
  auto sq = make_catalog_function(FunctionSpec::shifted_sqnorm(Vec::Zero(2))).fn;
  CHECK(check_gradient(sq, vec2(3, 4), 1e-5) <= 1e-8);

  auto softplus = make_catalog_function(FunctionSpec::logsumexp_softplus(1)).fn;
  Vec zero1(1);
  zero1 << 0.0;
  // closed form: grad at 0 is -1/2
  CHECK(softplus.grad(zero1)[0] == Catch::Approx(-0.5).margin(1e-15));
  CHECK(check_gradient(softplus, zero1, 1e-5) <= 1e-6);

  auto quad = make_catalog_function(FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(2))).fn;
  CHECK(check_gradient(quad, vec2(1, 1), 1e-5) <= 1e-8);
  CHECK((quad.grad(vec2(1, 1)) - vec2(1, 0)).norm() == 0.0);
}

TEST_CASE("check_gradient rejects bad inputs") {
  auto sq = make_catalog_function(FunctionSpec::shifted_sqnorm(Vec::Zero(2))).fn;
  CHECK_THROWS_AS(check_gradient(sq, vec2(1, 1), 0.0), InvalidSpec);
}

TEST_CASE("convexity inequality sampled over the catalog") {
  std::mt19937_64 rng(20240811);
  for (const auto& fn : catalog_functions()) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec x = random_in_ball(rng, fn.dim);
      const Vec y = random_in_ball(rng, fn.dim);
      const double slack = fn.eval(y) - fn.eval(x) - fn.grad(x).dot(y - x);
      REQUIRE(slack >= -1e-9);
      if (fn.strong_convexity_modulus > 0.0) {
        const double s2 =
            slack - 0.5 * fn.strong_convexity_modulus * (y - x).squaredNorm();
        REQUIRE(s2 >= -1e-9);
      }
    }
  }
}

TEST_CASE("gradients agree with central differences at random points") {
  std::mt19937_64 rng(77);
  for (const auto& fn : catalog_functions())
    for (int trial = 0; trial < 100; ++trial)
      REQUIRE(check_gradient(fn, random_in_ball(rng, fn.dim, 2.0), 1e-5) <= 1e-5);
}

TEST_CASE("project_argmin on the pinned examples") {
  auto line = build_problem({FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(2)),
                             FunctionSpec::shifted_sqnorm(Vec::Zero(2))});
  CHECK((project_argmin(line, vec2(3, 4)) - vec2(0, 4)).norm() < 1e-12);

  auto point = build_problem({FunctionSpec::shifted_sqnorm(vec2(1, 2)),
                              FunctionSpec::shifted_sqnorm(Vec::Zero(2))});
  CHECK((project_argmin(point, vec2(9, 9)) - vec2(1, 2)).norm() == 0.0);

  // diagonal line through the origin
  Mat q(2, 2);
  q << 0.5, -0.5, -0.5, 0.5;  // PSD, null space spanned by (1,1)/sqrt(2)
  auto diag = build_problem({FunctionSpec::quadratic(q, Vec::Zero(2)),
                             FunctionSpec::shifted_sqnorm(Vec::Zero(2))});
  CHECK((project_argmin(diag, vec2(1, 0)) - vec2(0.5, 0.5)).norm() < 1e-10);
}

TEST_CASE("project_argmin is idempotent and nonexpansive; empty sets are refused") {
  auto line = build_problem({FunctionSpec::quadratic(diag2(1, 0), Vec::Zero(2)),
                             FunctionSpec::shifted_sqnorm(Vec::Zero(2))});
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = random_in_ball(rng, 2, 5.0);
    const Vec y = random_in_ball(rng, 2, 5.0);
    const Vec px = project_argmin(line, x);
    CHECK((project_argmin(line, px) - px).norm() <= 1e-12);
    CHECK((px - project_argmin(line, y)).norm() <= (x - y).norm() + 1e-12);
  }
  auto empty = build_problem({FunctionSpec::logsumexp_softplus(2),
                              FunctionSpec::shifted_sqnorm(Vec::Zero(2))});
  CHECK_THROWS_AS(project_argmin(empty, vec2(0, 0)), UnsupportedSet);
}

TEST_CASE("x_star and p_star satisfy their stationarity invariants") {
  Mat a(3, 2);
  a << 1, 0, 1, 0, 0, 0;
  Vec b(3);
  b << 1, 1, 0;
  auto p = build_problem({FunctionSpec::least_squares(a, b),
                          FunctionSpec::shifted_sqnorm(vec2(1, 0))});
  REQUIRE(p.x_star.has_value());
  CHECK(p.u.grad(*p.x_star).norm() <= 1e-12);
  REQUIRE(p.p_star.has_value());
  // p_star lies in the affine set and grad U is orthogonal to it
  CHECK((*p.p_star - project_argmin(p, *p.p_star)).norm() <= 1e-10);
  CHECK(std::abs(p.s_phi.basis.col(0).dot(p.u.grad(*p.p_star))) <= 1e-10);
}
