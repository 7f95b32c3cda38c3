#ifndef TIKDYN_DIAGNOSTICS_HPP
#define TIKDYN_DIAGNOSTICS_HPP

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "tikdyn/common.hpp"
#include "tikdyn/convex.hpp"
#include "tikdyn/integrate.hpp"
#include "tikdyn/schedules.hpp"

namespace tikdyn {

enum class EnergyVariant { plain, full };

/// plain: 0.5|v|^2 + Phi(x) - Phi*;  full: plain + eps(t)(U(x) - U*).
inline double energy(const ProblemInstance& p, const DampingSchedule& /*g*/,
                     const TikhonovSchedule& e, const State& s, EnergyVariant variant) {
  if (!p.phi.inf_value.known())
    throw InvalidSpec("energy: Phi has no known infimum (integrate records an estimate)");
  double w = 0.5 * s.v.squaredNorm() + p.phi.eval(s.x) - p.phi.inf_value.value;
  if (variant == EnergyVariant::full) {
    if (!p.u.inf_value.known())
      throw InvalidSpec("energy: U has no known infimum (integrate records an estimate)");
    w += e.value(s.t) * (p.u.eval(s.x) - p.u.inf_value.value);
  }
  return w;
}

/// h_ref(t) = 0.5 |x(t) - ref|^2.
inline double distance_sq(const State& s, const Vec& ref) {
  if (s.x.size() != ref.size()) throw InvalidSpec("distance_sq: dimension mismatch");
  return 0.5 * (s.x - ref).squaredNorm();
}

/// Cumulative trapezoidal integral of gamma(t) |v(t)|^2 on the sample grid.
inline std::vector<double> damped_speed_integral(const Trajectory& traj,
                                                 const DampingSchedule& g) {
  if (traj.samples.size() < 2)
    throw InsufficientData("damped_speed_integral: need at least 2 samples");
  std::vector<double> out(traj.samples.size(), 0.0);
  auto integrand = [&](const TrajectorySample& s) {
    return g.value(s.state.t) * s.state.v.squaredNorm();
  };
  double prev = integrand(traj.samples[0]);
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const double cur = integrand(traj.samples[k]);
    const double dt = traj.samples[k].state.t - traj.samples[k - 1].state.t;
    out[k] = out[k - 1] + 0.5 * dt * (prev + cur);
    prev = cur;
  }
  return out;
}

struct RateEstimate {
  double exponent = 0.0;
  double r_squared = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  double weighted_tail_sup = 0.0;  // max over window of t^{1+theta} y(t)
  int points_used = 0;
  int points_dropped = 0;
};

/// Least-squares slope of log y against log t over the final
/// `window_decades` log-decades. Points at or below 1e-300 are dropped.
inline RateEstimate estimate_decay_exponent(const std::vector<std::pair<double, double>>& series,
                                            double window_decades, double theta) {
  if (series.empty()) throw InsufficientData("estimate_decay_exponent: empty series");
  const double t_hi = series.back().first;
  const double t_lo = t_hi / std::pow(10.0, window_decades);
  RateEstimate est;
  est.window_lo = t_lo;
  est.window_hi = t_hi;

  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, y] : series) {
    if (t < t_lo * (1.0 - 1e-12) || t > t_hi * (1.0 + 1e-12)) continue;
    if (!(y > 1e-300)) {
      ++est.points_dropped;
      continue;
    }
    pts.emplace_back(std::log(t), std::log(y));
    est.weighted_tail_sup = std::max(est.weighted_tail_sup, std::pow(t, 1.0 + theta) * y);
  }
  est.points_used = static_cast<int>(pts.size());
  if (pts.size() < 10)
    throw InsufficientData("estimate_decay_exponent: fewer than 10 usable points in window");

  double sx = 0, sy = 0;
  for (const auto& [lx, ly] : pts) {
    sx += lx;
    sy += ly;
  }
  const double mx = sx / pts.size(), my = sy / pts.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [lx, ly] : pts) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  est.exponent = sxy / sxx;
  const double ss_res = syy - sxy * sxy / sxx;
  est.r_squared = syy > 1e-30 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  return est;
}

/// max over samples with t in [lo, hi] of t^power * y(t).
inline double windowed_weighted_sup(const std::vector<std::pair<double, double>>& series,
                                    double lo, double hi, double power) {
  double sup = 0.0;
  for (const auto& [t, y] : series)
    if (t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12))
      sup = std::max(sup, std::pow(t, power) * y);
  return sup;
}

inline std::vector<std::pair<double, double>> w_plain_series(const Trajectory& traj) {
  std::vector<std::pair<double, double>> s;
  s.reserve(traj.samples.size());
  for (const auto& smp : traj.samples) s.emplace_back(smp.state.t, smp.w_plain);
  return s;
}

inline std::vector<std::pair<double, double>> speed_series(const Trajectory& traj) {
  std::vector<std::pair<double, double>> s;
  s.reserve(traj.samples.size());
  for (const auto& smp : traj.samples) s.emplace_back(smp.state.t, smp.state.v.norm());
  return s;
}

/// Along-trajectory residual of W' = -gamma|v|^2 + eps'(U - U*): max over
/// interior samples of |dW/dt - rhs| / (1 + |rhs|), with a three-point
/// centered difference that accounts for the nonuniform grid.
inline double energy_identity_residual(const Trajectory& traj, const ProblemInstance& p,
                                       const DampingSchedule& g, const TikhonovSchedule& e) {
  if (traj.samples.size() < 3)
    throw InsufficientData("energy_identity_residual: need at least 3 samples");
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.samples.size(); ++k) {
    const auto& sm = traj.samples[k - 1];
    const auto& s0 = traj.samples[k];
    const auto& sp = traj.samples[k + 1];
    const double hm = s0.state.t - sm.state.t;
    const double hp = sp.state.t - s0.state.t;
    const double dw = -hp / (hm * (hm + hp)) * sm.w_full +
                      (hp - hm) / (hm * hp) * s0.w_full +
                      hm / (hp * (hm + hp)) * sp.w_full;
    const double rhs = -g.value(s0.state.t) * s0.state.v.squaredNorm() +
                       e.derivative(s0.state.t) * (p.u.eval(s0.state.x) - traj.u_star);
    worst = std::max(worst, std::abs(dw - rhs) / (1.0 + std::abs(rhs)));
  }
  return worst;
}

struct EnergyMonotonicity {
  bool ok = true;
  double max_increase = 0.0;  // largest sample-to-sample increase of W_full
  double slack = 0.0;
  double t_worst = 0.0;
};

/// W_full must not increase between consecutive samples beyond
/// 1e-7 * (1 + W_full(t0)).
inline EnergyMonotonicity check_energy_dissipation(const Trajectory& traj) {
  if (traj.samples.empty()) throw InsufficientData("check_energy_dissipation: empty trajectory");
  EnergyMonotonicity m;
  m.slack = 1e-7 * (1.0 + traj.samples.front().w_full);
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const double inc = traj.samples[k].w_full - traj.samples[k - 1].w_full;
    if (inc > m.max_increase) {
      m.max_increase = inc;
      m.t_worst = traj.samples[k].state.t;
    }
  }
  m.ok = m.max_increase <= m.slack;
  return m;
}

struct Q1Witnesses {
  double tail_sup_weighted_speed = 0.0;       // sup over [T/10, T] of t^theta |v|
  double weighted_speed_integral = 0.0;       // trapezoid of t^theta |v|^2 over the run
  double weighted_speed_integral_tail_ratio = 0.0;
};

struct ConvergenceReport {
  Vec x_final;
  double t_final = 0.0;
  std::optional<double> dist_to_x_star;
  std::optional<double> dist_to_p_star;
  std::optional<double> dist_to_s_phi;
  double damped_speed_integral_total = 0.0;
  double damped_speed_integral_tail_ratio = 0.0;  // (I(T) - I(T/2)) / I(T)
  Q1Witnesses q1;
  bool unbounded_flag = false;
  double norm_initial = 0.0, norm_final = 0.0;
  double growth_ratio = 0.0;
  double u_gap_final = 0.0;  // U(x(T)) - U*
};

namespace detail {

inline double interp_at(const std::vector<double>& ts, const std::vector<double>& ys, double t) {
  if (t <= ts.front()) return ys.front();
  if (t >= ts.back()) return ys.back();
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

}  // namespace detail

/// Distances to the known targets, the damped-speed integral tail, empirical
/// witnesses for the strong-convergence hypotheses, and the unboundedness
/// flag for empty-argmin problems.
inline ConvergenceReport convergence_report(const Trajectory& traj, const ProblemInstance& p,
                                            double theta) {
  if (traj.samples.size() < 2)
    throw InsufficientData("convergence_report: need at least 2 samples");
  ConvergenceReport rep;
  const auto& last = traj.samples.back();
  rep.x_final = last.state.x;
  rep.t_final = last.state.t;
  rep.norm_initial = traj.samples.front().state.x.norm();
  rep.norm_final = rep.x_final.norm();
  rep.growth_ratio = rep.norm_final / std::max(rep.norm_initial, 1e-300);
  rep.u_gap_final = p.u.eval(rep.x_final) - traj.u_star;

  if (p.x_star) rep.dist_to_x_star = (rep.x_final - *p.x_star).norm();
  if (p.p_star) rep.dist_to_p_star = (rep.x_final - *p.p_star).norm();
  if (p.s_phi.projectable())
    rep.dist_to_s_phi = (rep.x_final - project_argmin(p, rep.x_final)).norm();

  std::vector<double> ts;
  ts.reserve(traj.samples.size());
  for (const auto& s : traj.samples) ts.push_back(s.state.t);

  const auto I = damped_speed_integral(traj, traj.gamma);
  rep.damped_speed_integral_total = I.back();
  const double T = ts.back();
  const double I_half = detail::interp_at(ts, I, 0.5 * T);
  rep.damped_speed_integral_tail_ratio =
      (I.back() - I_half) / std::max(I.back(), 1e-300);

  // Q1 hypothesis witnesses (reported, never asserted)
  {
    std::vector<double> J(traj.samples.size(), 0.0);
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
      const double t = ts[k];
      const double speed = traj.samples[k].state.v.norm();
      if (k > 0) {
        const double a =
            std::pow(ts[k - 1], theta) * traj.samples[k - 1].state.v.squaredNorm();
        const double b = std::pow(t, theta) * speed * speed;
        J[k] = J[k - 1] + 0.5 * (ts[k] - ts[k - 1]) * (a + b);
      }
      if (t >= T / 10.0)
        rep.q1.tail_sup_weighted_speed =
            std::max(rep.q1.tail_sup_weighted_speed, std::pow(t, theta) * speed);
    }
    rep.q1.weighted_speed_integral = J.back();
    const double J_half = detail::interp_at(ts, J, 0.5 * T);
    rep.q1.weighted_speed_integral_tail_ratio =
        (J.back() - J_half) / std::max(J.back(), 1e-300);
  }

  // Unbounded iff |x| is nondecreasing over the last decade and the final
  // norm exceeds 10x the initial one.
  bool increasing = true;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    if (ts[k - 1] < T / 10.0) continue;
    const double n0 = traj.samples[k - 1].state.x.norm();
    const double n1 = traj.samples[k].state.x.norm();
    if (n1 < n0 * (1.0 - 1e-12)) {
      increasing = false;
      break;
    }
  }
  rep.unbounded_flag = increasing && rep.norm_final > 10.0 * rep.norm_initial;
  return rep;
}

}  // namespace tikdyn

#endif
