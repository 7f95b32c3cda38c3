#ifndef TIKDYN_TIKHONOV_HPP
#define TIKDYN_TIKHONOV_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tikdyn/common.hpp"
#include "tikdyn/convex.hpp"

namespace tikdyn {

/// One point of the regularization path: the minimizer of Phi + eps U.
struct TikhonovPoint {
  double epsilon = 0.0;
  Vec x_eps;
  double phi_t_value = 0.0;
  long inner_iterations = 0;
  double grad_norm = 0.0;
};

/// Inner gradient descent hit the iteration cap; carries the last iterate.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(std::string msg, TikhonovPoint last)
      : std::runtime_error(std::move(msg)), last_iterate(std::move(last)) {}
  TikhonovPoint last_iterate;
};

struct MinimizeOptions {
  bool force_gradient_descent = false;
  std::optional<Vec> warm_start;
  long max_iterations = 1000000;
};

/// Minimize Phi_eps = Phi + eps U. Quadratic pairs are solved exactly with a
/// factorization; everything else runs gradient descent with the fixed step
/// 1/(L_Phi + eps L_U), which converges linearly since Phi_eps is
/// (eps m)-strongly convex.
inline TikhonovPoint minimize_phi_t(const ProblemInstance& p, double eps, double tol,
                                    const MinimizeOptions& opts = {}) {
  const double m = p.u.strong_convexity_modulus;
  if (!(m > 0.0))
    throw NotStronglyConvex("minimize_phi_t: U must be strongly convex (m > 0)");
  if (!(eps > 0.0)) throw InvalidSpec("minimize_phi_t: eps must be positive");
  if (!(tol > 0.0)) throw InvalidSpec("minimize_phi_t: tol must be positive");

  auto phi_t = [&](const Vec& x) { return p.phi.eval(x) + eps * p.u.eval(x); };
  auto grad_t = [&](const Vec& x) -> Vec { return p.phi.grad(x) + eps * p.u.grad(x); };

  TikhonovPoint pt;
  pt.epsilon = eps;

  if (p.phi.quadratic && p.u.quadratic && !opts.force_gradient_descent) {
    const Mat h = p.phi.quadratic->hessian + eps * p.u.quadratic->hessian;
    const Vec rhs = p.phi.quadratic->linear + eps * p.u.quadratic->linear;
    pt.x_eps = h.ldlt().solve(rhs);
    pt.inner_iterations = 0;
  } else {
    Vec x;
    if (opts.warm_start)
      x = *opts.warm_start;
    else if (p.x_star)
      x = *p.x_star;
    else
      x = Vec::Zero(p.dim);
    const double step =
        1.0 / (p.phi.grad_lipschitz_on_unit_ball + eps * p.u.grad_lipschitz_on_unit_ball);
    long it = 0;
    Vec g = grad_t(x);
    while (g.norm() > tol) {
      if (++it > opts.max_iterations) {
        pt.x_eps = x;
        pt.inner_iterations = it - 1;
        pt.grad_norm = g.norm();
        pt.phi_t_value = phi_t(x);
        throw NonConvergence("minimize_phi_t: iteration cap reached at eps = " + fmt_g(eps), pt);
      }
      x -= step * g;
      g = grad_t(x);
    }
    pt.x_eps = std::move(x);
    pt.inner_iterations = it;
  }
  pt.grad_norm = grad_t(pt.x_eps).norm();
  pt.phi_t_value = phi_t(pt.x_eps);
  return pt;
}

struct TikhonovVerdict {
  bool t1_all = true;          // Phi_eps(x_eps) <= Phi_eps(p*) at every point
  bool t2_all = true;          // U(x_eps) <= U(p*) at every point
  bool monotone_tail = true;   // |x_eps - p*| nonincreasing over the last 3 points
  double final_dist = 0.0;
  double worst_t1_slack = 0.0;  // most positive violation seen
  double worst_t2_slack = 0.0;
};

struct TikhonovCurve {
  std::vector<TikhonovPoint> points;
  std::vector<double> dist_to_p_star;
  TikhonovVerdict verdict;
};

/// Walk a strictly decreasing eps grid with warm starts and check the path
/// inequalities and the approach to p*.
inline TikhonovCurve tikhonov_curve(const ProblemInstance& p, const std::vector<double>& eps_grid,
                                    double check_tol = 1e-9) {
  if (!p.p_star) throw InvalidSpec("tikhonov_curve: p_star is not available for this problem");
  if (eps_grid.empty()) throw InvalidSpec("tikhonov_curve: empty eps grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0)) throw InvalidSpec("tikhonov_curve: eps grid must be positive");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))
      throw InvalidSpec("tikhonov_curve: eps grid must be strictly decreasing");
  }

  const Vec& p_star = *p.p_star;
  const double m = p.u.strong_convexity_modulus;
  const double u_at_pstar = p.u.eval(p_star);
  const double phi_at_pstar = p.phi.eval(p_star);

  TikhonovCurve curve;
  MinimizeOptions opts;
  for (const double eps : eps_grid) {
    const double tol = std::max(1e-12, 1e-8 * eps * m);
    TikhonovPoint pt = minimize_phi_t(p, eps, tol, opts);
    opts.warm_start = pt.x_eps;

    const double phi_t_at_pstar = phi_at_pstar + eps * u_at_pstar;
    const double t1_slack = pt.phi_t_value - phi_t_at_pstar;
    const double t2_slack = p.u.eval(pt.x_eps) - u_at_pstar;
    curve.verdict.worst_t1_slack = std::max(curve.verdict.worst_t1_slack, t1_slack);
    curve.verdict.worst_t2_slack = std::max(curve.verdict.worst_t2_slack, t2_slack);
    if (t1_slack > check_tol * (1.0 + std::abs(phi_at_pstar))) curve.verdict.t1_all = false;
    if (t2_slack > check_tol * (1.0 + std::abs(u_at_pstar))) curve.verdict.t2_all = false;

    curve.dist_to_p_star.push_back((pt.x_eps - p_star).norm());
    curve.points.push_back(std::move(pt));
  }

  const std::size_t k = curve.dist_to_p_star.size();
  for (std::size_t i = (k > 3 ? k - 3 : 1); i < k; ++i)
    if (curve.dist_to_p_star[i] > curve.dist_to_p_star[i - 1] + 1e-9)
      curve.verdict.monotone_tail = false;
  curve.verdict.final_dist = curve.dist_to_p_star.back();
  return curve;
}

}  // namespace tikdyn

#endif
