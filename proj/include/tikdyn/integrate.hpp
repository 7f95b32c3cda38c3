#ifndef TIKDYN_INTEGRATE_HPP
#define TIKDYN_INTEGRATE_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tikdyn/common.hpp"
#include "tikdyn/convex.hpp"
#include "tikdyn/schedules.hpp"

namespace tikdyn {

struct State {
  double t = 0.0;
  Vec x;
  Vec v;
};

struct TrajectorySample {
  State state;
  double w_plain = 0.0;
  double w_full = 0.0;
};

struct SolverMeta {
  std::string method;
  double abs_tol = 0.0, rel_tol = 0.0;
  long steps_accepted = 0;
  long steps_rejected = 0;
  long rhs_evaluations = 0;
};

struct Trajectory {
  ProblemInstance problem;
  DampingSchedule gamma;
  TikhonovSchedule epsilon;
  std::vector<TrajectorySample> samples;
  SolverMeta meta;
  bool complete = true;      // false when max_steps truncated the run
  bool stiff_abort = false;  // step controller hit the step floor
  bool estimated_infimum = false;
  double phi_star = 0.0;  // values actually used for the energy columns
  double u_star = 0.0;
};

struct IntegrateOptions {
  double t_end = 1e4;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  int samples_per_decade = 50;
  long max_steps = 20000000;
};

/// Trajectory state went non-finite; carries the last good state and the
/// samples recorded so far.
class BlowUpError : public NumericError {
 public:
  BlowUpError(std::string msg, State last, std::shared_ptr<Trajectory> partial)
      : NumericError(std::move(msg)), last_good(std::move(last)), partial_trajectory(std::move(partial)) {}
  State last_good;
  std::shared_ptr<Trajectory> partial_trajectory;
};

/// Right-hand side of the second-order flow as (dx, dv):
///   dx = v,   dv = -gamma(t) v - grad Phi(x) - eps(t) grad U(x).
inline std::pair<Vec, Vec> dynamics_rhs(const ProblemInstance& p, const DampingSchedule& g,
                                        const TikhonovSchedule& e, const State& s) {
  if (s.t < g.t0 || s.t < e.t0)
    throw std::domain_error("dynamics_rhs: t below the schedule domain");
  const Vec gphi = p.phi.grad(s.x);
  if (!gphi.allFinite()) {
    for (int i = 0; i < gphi.size(); ++i)
      if (!std::isfinite(gphi[i]))
        throw NumericError("dynamics_rhs: grad Phi non-finite at coordinate " + std::to_string(i));
  }
  Vec dv = -g.value(s.t) * s.v - gphi;
  const double eps = e.value(s.t);
  if (eps != 0.0) {
    const Vec gu = p.u.grad(s.x);
    if (!gu.allFinite()) {
      for (int i = 0; i < gu.size(); ++i)
        if (!std::isfinite(gu[i]))
          throw NumericError("dynamics_rhs: grad U non-finite at coordinate " + std::to_string(i));
    }
    dv -= eps * gu;
  }
  return {s.v, std::move(dv)};
}

/// Log-spaced sampling grid on [t0, t_end]; a nonpositive t0 is emitted as a
/// leading point ahead of the geometric part.
inline std::vector<double> log_sample_grid(double t0, double t_end, int per_decade) {
  if (!(t_end > t0)) throw InvalidSpec("sample grid: t_end must exceed t0");
  if (per_decade < 1) throw InvalidSpec("sample grid: samples per decade must be >= 1");
  std::vector<double> grid;
  double lo = t0;
  if (!(t0 > 0.0)) {
    grid.push_back(t0);
    lo = std::min(1e-2, 1e-4 * t_end);
  }
  const double decades = std::log10(t_end / lo);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
  for (int i = 0; i < n; ++i) {
    double t = lo * std::pow(10.0, decades * i / (n - 1));
    if (i == 0) t = lo;
    if (i == n - 1) t = t_end;
    if (!grid.empty() && t <= grid.back() * (1.0 + 1e-14)) continue;
    grid.push_back(t);
  }
  if (grid.back() != t_end) grid.push_back(t_end);
  return grid;
}

namespace detail {

struct RawSample {
  double t;
  Vec x, v;
  double phi_val, u_val;
};

class EnergyRecorder {
 public:
  EnergyRecorder(const ProblemInstance& p, const TikhonovSchedule& e) : p_(p), e_(e) {}

  void add(double t, const Vec& x, const Vec& v) {
    RawSample s{t, x, v, p_.phi.eval(x), p_.u.eval(x)};
    min_phi_ = std::min(min_phi_, s.phi_val);
    min_u_ = std::min(min_u_, s.u_val);
    raw_.push_back(std::move(s));
  }

  // Track the running minimum over accepted step endpoints too, so an
  // estimated infimum is not limited to the sample grid.
  void observe(const Vec& x) {
    if (p_.phi.inf_value.known() && p_.u.inf_value.known()) return;
    min_phi_ = std::min(min_phi_, p_.phi.eval(x));
    min_u_ = std::min(min_u_, p_.u.eval(x));
  }

  void finalize(Trajectory& traj) const {
    traj.estimated_infimum = !p_.phi.inf_value.known() || !p_.u.inf_value.known();
    traj.phi_star = p_.phi.inf_value.known() ? p_.phi.inf_value.value : min_phi_;
    traj.u_star = p_.u.inf_value.known() ? p_.u.inf_value.value : min_u_;
    traj.samples.clear();
    traj.samples.reserve(raw_.size());
    for (const auto& s : raw_) {
      const double w_plain = 0.5 * s.v.squaredNorm() + s.phi_val - traj.phi_star;
      const double w_full = w_plain + e_.value(s.t) * (s.u_val - traj.u_star);
      traj.samples.push_back({State{s.t, s.x, s.v}, w_plain, w_full});
    }
  }

 private:
  const ProblemInstance& p_;
  const TikhonovSchedule& e_;
  std::vector<RawSample> raw_;
  double min_phi_ = std::numeric_limits<double>::infinity();
  double min_u_ = std::numeric_limits<double>::infinity();
};

inline void eval_rhs_flat(const ProblemInstance& p, const DampingSchedule& g,
                          const TikhonovSchedule& e, double t, const Vec& y, Vec& dy) {
  const int n = p.dim;
  const auto x = y.head(n);
  const auto v = y.tail(n);
  dy.head(n) = v;
  dy.tail(n) = -g.value(t) * v - p.phi.grad(x);
  const double eps = e.value(t);
  if (eps != 0.0) dy.tail(n) -= eps * p.u.grad(x);
}

inline void validate_init(const ProblemInstance& p, const DampingSchedule& g,
                          const TikhonovSchedule& e, const State& init) {
  const double t0 = std::max(g.t0, e.t0);
  if (std::abs(init.t - t0) > 1e-12 * std::max(1.0, std::abs(t0)))
    throw InvalidSpec("integrate: init.t must equal max(t0 of schedules)");
  if (init.x.size() != p.dim || init.v.size() != p.dim)
    throw InvalidSpec("integrate: state dimension mismatch");
  if (!init.x.allFinite() || !init.v.allFinite())
    throw InvalidSpec("integrate: initial state must be finite");
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) with PI step control and 4th-order dense
/// output; energies are recorded on the log-spaced sample grid.
inline Trajectory integrate(const ProblemInstance& p, const DampingSchedule& g,
                            const TikhonovSchedule& e, const State& init,
                            const IntegrateOptions& opts) {
  detail::validate_init(p, g, e, init);
  if (!(opts.t_end > init.t)) throw InvalidSpec("integrate: t_end must exceed t0");
  if (!(opts.abs_tol > 0.0) || !(opts.rel_tol > 0.0))
    throw InvalidSpec("integrate: tolerances must be positive");

  // Dormand-Prince coefficients
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  // dense-output weights
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
  static constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  static constexpr double fac_min = 0.2, fac_max = 10.0;

  Trajectory traj;
  traj.problem = p;
  traj.gamma = g;
  traj.epsilon = e;
  traj.meta.method = "dopri5";
  traj.meta.abs_tol = opts.abs_tol;
  traj.meta.rel_tol = opts.rel_tol;

  const int n = p.dim;
  const auto grid = log_sample_grid(init.t, opts.t_end, opts.samples_per_decade);
  detail::EnergyRecorder rec(p, e);
  rec.add(init.t, init.x, init.v);

  Vec y(2 * n), y_new(2 * n), y_stage(2 * n), err(2 * n);
  Vec k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n), k5(2 * n), k6(2 * n), k7(2 * n);
  y.head(n) = init.x;
  y.tail(n) = init.v;

  double t = init.t;
  auto f = [&](double tt, const Vec& yy, Vec& out) {
    detail::eval_rhs_flat(p, g, e, tt, yy, out);
    ++traj.meta.rhs_evaluations;
  };
  f(t, y, k1);

  auto blow_up = [&](const char* where) {
    rec.finalize(traj);
    traj.complete = false;
    auto partial = std::make_shared<Trajectory>(traj);
    State last{t, y.head(n), y.tail(n)};
    throw BlowUpError(std::string("integrate: non-finite state (") + where + ") at t = " +
                          fmt_g(t),
                      std::move(last), std::move(partial));
  };

  // initial step size (Hairer's hinit)
  double h;
  {
    Vec sc = opts.abs_tol + y.cwiseAbs().array() * opts.rel_tol;
    const double d0 = (y.array() / sc.array()).matrix().norm() / std::sqrt(2.0 * n);
    const double dd1 = (k1.array() / sc.array()).matrix().norm() / std::sqrt(2.0 * n);
    double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h0 = std::min(h0, opts.t_end - t);
    Vec y1 = y + h0 * k1;
    Vec f1(2 * n);
    f(t + h0, y1, f1);
    const double d2 = ((f1 - k1).array() / sc.array()).matrix().norm() / std::sqrt(2.0 * n) / h0;
    double h1;
    if (std::max(dd1, d2) <= 1e-15)
      h1 = std::max(1e-6, h0 * 1e-3);
    else
      h1 = std::pow(0.01 / std::max(dd1, d2), 0.2);
    h = std::min({100.0 * h0, h1, opts.t_end - t});
  }

  std::size_t next_sample = 1;  // grid[0] already recorded
  double fac_old = 1e-4;
  bool last_step_rejected = false;

  while (t < opts.t_end) {
    if (traj.meta.steps_accepted + traj.meta.steps_rejected >= opts.max_steps) {
      traj.complete = false;
      break;
    }
    if (h < 1e-12 * std::max(1.0, std::abs(t))) {
      traj.stiff_abort = true;
      traj.complete = false;
      break;
    }
    bool final_step = false;
    if (t + h >= opts.t_end) {
      h = opts.t_end - t;
      final_step = true;
    }

    y_stage = y + h * (a21 * k1);
    f(t + c2 * h, y_stage, k2);
    y_stage = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, y_stage, k3);
    y_stage = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, y_stage, k4);
    y_stage = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, y_stage, k5);
    y_stage = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, y_stage, k6);
    y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, y_new, k7);  // FSAL

    if (!y_new.allFinite()) blow_up("stage");

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err_norm = 0.0;
    for (int i = 0; i < 2 * n; ++i) {
      const double sc =
          opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      const double r = err[i] / sc;
      err_norm += r * r;
    }
    err_norm = std::sqrt(err_norm / (2.0 * n));

    if (err_norm <= 1.0) {
      // accept; emit pending samples inside (t, t+h] from the dense interpolant
      const double t_new = final_step ? opts.t_end : t + h;
      if (next_sample < grid.size() && grid[next_sample] <= t_new * (1.0 + 1e-14)) {
        const Vec ydiff = y_new - y;
        const Vec bspl = h * k1 - ydiff;
        const Vec r4 = ydiff - h * k7 - bspl;
        const Vec r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next_sample < grid.size() && grid[next_sample] <= t_new * (1.0 + 1e-14)) {
          const double ts = std::min(grid[next_sample], t_new);
          const double th = std::min(1.0, (ts - t) / h);
          const double th1 = 1.0 - th;
          Vec ys = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
          rec.add(ts, ys.head(n), ys.tail(n));
          ++next_sample;
        }
      }
      t = t_new;
      y.swap(y_new);
      k1.swap(k7);
      rec.observe(y.head(n));
      ++traj.meta.steps_accepted;

      const double fac11 = std::pow(std::max(err_norm, 1e-10), expo1);
      double fac = fac11 / std::pow(fac_old, beta);
      fac = std::max(1.0 / fac_max, std::min(1.0 / fac_min, fac / safe));
      double h_new = h / fac;
      if (last_step_rejected) h_new = std::min(h_new, h);
      h = h_new;
      fac_old = std::max(err_norm, 1e-4);
      last_step_rejected = false;
    } else {
      ++traj.meta.steps_rejected;
      const double fac11 = std::pow(err_norm, expo1);
      h = h / std::min(1.0 / fac_min, fac11 / safe);
      last_step_rejected = true;
    }
  }

  rec.finalize(traj);
  return traj;
}

/// Fixed-step classical RK4 oracle. Steps land exactly on the sample grid;
/// deterministic and independent of the adaptive path.
inline Trajectory integrate_reference(const ProblemInstance& p, const DampingSchedule& g,
                                      const TikhonovSchedule& e, const State& init, double step,
                                      double t_end, int samples_per_decade = 50) {
  detail::validate_init(p, g, e, init);
  if (!(step > 0.0 && step <= 1e-2))
    throw InvalidSpec("integrate_reference: step must lie in (0, 1e-2]");
  if (!(t_end > init.t)) throw InvalidSpec("integrate_reference: t_end must exceed t0");

  Trajectory traj;
  traj.problem = p;
  traj.gamma = g;
  traj.epsilon = e;
  traj.meta.method = "rk4-fixed";
  traj.meta.abs_tol = 0.0;
  traj.meta.rel_tol = 0.0;

  const int n = p.dim;
  const auto grid = log_sample_grid(init.t, t_end, samples_per_decade);
  detail::EnergyRecorder rec(p, e);
  rec.add(init.t, init.x, init.v);

  Vec y(2 * n), k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n), tmp(2 * n);
  y.head(n) = init.x;
  y.tail(n) = init.v;
  double t = init.t;
  std::size_t next_sample = 1;

  auto f = [&](double tt, const Vec& yy, Vec& out) {
    detail::eval_rhs_flat(p, g, e, tt, yy, out);
    ++traj.meta.rhs_evaluations;
  };

  Vec y_prev(2 * n);
  while (t < t_end) {
    double target = t_end;
    if (next_sample < grid.size()) target = std::min(target, grid[next_sample]);
    const bool lands = target - t <= step * (1.0 + 1e-12);
    double h = lands ? target - t : step;
    const double t_prev = t;
    y_prev = y;

    f(t, y, k1);
    tmp = y + 0.5 * h * k1;
    f(t + 0.5 * h, tmp, k2);
    tmp = y + 0.5 * h * k2;
    f(t + 0.5 * h, tmp, k3);
    tmp = y + h * k3;
    f(t + h, tmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = lands ? target : t + h;

    if (!y.allFinite()) {
      rec.finalize(traj);
      traj.complete = false;
      auto partial = std::make_shared<Trajectory>(traj);
      State last{t_prev, y_prev.head(n), y_prev.tail(n)};
      throw BlowUpError("integrate_reference: non-finite state at t = " + fmt_g(t),
                        std::move(last), std::move(partial));
    }
    ++traj.meta.steps_accepted;
    rec.observe(y.head(n));
    if (next_sample < grid.size() && t == grid[next_sample]) {
      rec.add(t, y.head(n), y.tail(n));
      ++next_sample;
    }
  }
  rec.finalize(traj);
  return traj;
}

}  // namespace tikdyn

#endif
