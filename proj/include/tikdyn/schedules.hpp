#ifndef TIKDYN_SCHEDULES_HPP
#define TIKDYN_SCHEDULES_HPP

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "tikdyn/common.hpp"

namespace tikdyn {

/// Damping coefficient gamma(t) on [t0, +inf). Power families require t0 >= 1
/// so the t = 0 singularity is never inside the time domain.
struct DampingSchedule {
  enum class Form { power, constant, perturbed_power };
  Form form = Form::constant;
  double alpha = 0.0;  // power, perturbed_power
  double theta = 0.0;  // exponent of the leading term
  double g0 = 0.0;     // constant
  double delta = 0.0;  // perturbed_power
  double q = 0.0;      // perturbed_power
  double t0 = 1.0;

  static DampingSchedule power(double alpha, double theta, double t0 = 1.0) {
    if (!(alpha > 0.0)) throw InvalidSpec("gamma power: alpha must be positive");
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidSpec("gamma power: theta must lie in [0,1]");
    if (!(t0 >= 1.0)) throw InvalidSpec("gamma power: t0 must be >= 1");
    DampingSchedule g;
    g.form = Form::power;
    g.alpha = alpha;
    g.theta = theta;
    g.t0 = t0;
    return g;
  }
  static DampingSchedule constant(double g0, double t0 = 0.0) {
    if (!(g0 > 0.0)) throw InvalidSpec("gamma constant: g0 must be positive");
    if (!(t0 >= 0.0)) throw InvalidSpec("gamma constant: t0 must be >= 0");
    DampingSchedule g;
    g.form = Form::constant;
    g.g0 = g0;
    g.t0 = t0;
    return g;
  }
  static DampingSchedule perturbed_power(double alpha, double theta, double delta, double q,
                                         double t0 = 1.0) {
    if (!(alpha > 0.0)) throw InvalidSpec("gamma perturbed_power: alpha must be positive");
    if (!(theta >= 0.0 && theta <= 1.0))
      throw InvalidSpec("gamma perturbed_power: theta must lie in [0,1]");
    if (!(q > 1.0)) throw InvalidSpec("gamma perturbed_power: q must be > 1");
    if (!(t0 >= 1.0)) throw InvalidSpec("gamma perturbed_power: t0 must be >= 1");
    DampingSchedule g;
    g.form = Form::perturbed_power;
    g.alpha = alpha;
    g.theta = theta;
    g.delta = delta;
    g.q = q;
    g.t0 = t0;
    // Positivity on [t0, inf): alpha t^{q-theta} > -delta, LHS increasing.
    if (delta < 0.0 && alpha * std::pow(t0, q - theta) <= -delta)
      throw InvalidSpec("gamma perturbed_power: value is not positive at t0");
    return g;
  }

  double value(double t) const {
    check_domain(t);
    switch (form) {
      case Form::power: return alpha * std::pow(t, -theta);
      case Form::constant: return g0;
      case Form::perturbed_power:
        return alpha * std::pow(t, -theta) + delta * std::pow(t, -q);
    }
    return 0.0;
  }
  double derivative(double t) const {
    check_domain(t);
    switch (form) {
      case Form::power: return -alpha * theta * std::pow(t, -theta - 1.0);
      case Form::constant: return 0.0;
      case Form::perturbed_power:
        return -alpha * theta * std::pow(t, -theta - 1.0) - delta * q * std::pow(t, -q - 1.0);
    }
    return 0.0;
  }

 private:
  void check_domain(double t) const {
    if (t < t0) throw std::domain_error("damping schedule evaluated at t < t0");
  }
};

/// Tikhonov factor epsilon(t): positive nonincreasing power decay, or
/// identically zero (plain dynamics with no selection term).
struct TikhonovSchedule {
  enum class Form { power, zero };
  Form form = Form::zero;
  double c = 0.0;
  double p = 0.0;
  double t0 = 1.0;

  static TikhonovSchedule power(double c, double p, double t0 = 1.0) {
    if (!(c > 0.0)) throw InvalidSpec("epsilon power: c must be positive");
    if (!(p > 0.0)) throw InvalidSpec("epsilon power: p must be positive");
    if (!(t0 > 0.0)) throw InvalidSpec("epsilon power: t0 must be positive");
    TikhonovSchedule e;
    e.form = Form::power;
    e.c = c;
    e.p = p;
    e.t0 = t0;
    return e;
  }
  static TikhonovSchedule zero(double t0 = 0.0) {
    TikhonovSchedule e;
    e.form = Form::zero;
    e.t0 = t0;
    return e;
  }

  bool is_zero() const { return form == Form::zero; }

  double value(double t) const {
    check_domain(t);
    return form == Form::power ? c * std::pow(t, -p) : 0.0;
  }
  double derivative(double t) const {
    check_domain(t);
    return form == Form::power ? -c * p * std::pow(t, -p - 1.0) : 0.0;
  }

 private:
  void check_domain(double t) const {
    if (t < t0) throw std::domain_error("tikhonov schedule evaluated at t < t0");
  }
};

/// H4 and assumption witnesses for a damping schedule and a declared
/// (theta, alpha) pair.
struct DampingHypotheses {
  bool h4_ok = false;
  double k1 = 0.0, k2 = 0.0, t1_h4 = 0.0;

  bool lower_bound_ok = false;  // gamma(t) >= alpha / t^theta for t >= t1
  double t1_lower = 0.0;
  bool positive_part_integrable = false;
  double positive_part_integral = 0.0;  // finite value when integrable

  bool assump_ok = false;  // both parts
  bool numerical = false;
  std::string note;
};

namespace detail {

struct PowerTerm {
  double c;  // coefficient
  double e;  // exponent of t
};

// Collapse to at most two nonzero terms sorted by decreasing exponent.
inline std::vector<PowerTerm> tidy(std::vector<PowerTerm> terms) {
  std::sort(terms.begin(), terms.end(), [](auto& a, auto& b) { return a.e > b.e; });
  std::vector<PowerTerm> out;
  for (const auto& t : terms) {
    if (t.c == 0.0) continue;
    if (!out.empty() && std::abs(out.back().e - t.e) < 1e-15)
      out.back().c += t.c;
    else
      out.push_back(t);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](auto& t) { return t.c == 0.0; }),
            out.end());
  return out;
}

// t^theta * gamma(t) as a sum of power terms.
inline std::vector<PowerTerm> weighted_gamma_terms(const DampingSchedule& g, double theta) {
  switch (g.form) {
    case DampingSchedule::Form::power:
      return tidy({{g.alpha, theta - g.theta}});
    case DampingSchedule::Form::constant:
      return tidy({{g.g0, theta}});
    case DampingSchedule::Form::perturbed_power:
      return tidy({{g.alpha, theta - g.theta}, {g.delta, theta - g.q}});
  }
  return {};
}

inline std::vector<PowerTerm> derivative_terms(const std::vector<PowerTerm>& s) {
  std::vector<PowerTerm> d;
  for (const auto& t : s)
    if (t.e != 0.0) d.push_back({t.c * t.e, t.e - 1.0});
  return tidy(d);
}

inline double eval_terms(const std::vector<PowerTerm>& s, double t) {
  double v = 0.0;
  for (const auto& term : s) v += term.c * std::pow(t, term.e);
  return v;
}

// Exact integral of c * t^e over [lo, hi]; hi may be +inf when e < -1.
inline double power_integral(double c, double e, double lo, double hi) {
  if (std::isinf(hi)) return -c * std::pow(lo, e + 1.0) / (e + 1.0);
  if (e == -1.0) return c * std::log(hi / lo);
  return c * (std::pow(hi, e + 1.0) - std::pow(lo, e + 1.0)) / (e + 1.0);
}

struct PosPartIntegral {
  bool finite = false;
  double value = 0.0;
};

// Integral over [t0, inf) of the positive part of a sum of at most two power
// terms. Exact: a two-term sum changes sign at most once.
inline PosPartIntegral positive_part_integral(const std::vector<PowerTerm>& d, double t0) {
  const double inf = std::numeric_limits<double>::infinity();
  if (d.empty()) return {true, 0.0};
  if (d.size() == 1) {
    const auto [c, e] = d[0];
    if (c <= 0.0) return {true, 0.0};
    if (e < -1.0) return {true, power_integral(c, e, t0, inf)};
    return {false, inf};
  }
  const auto [c1, e1] = d[0];  // dominant (larger exponent)
  const auto [c2, e2] = d[1];
  if (c1 > 0.0 && c2 > 0.0) {
    if (e1 >= -1.0) return {false, inf};
    return {true, power_integral(c1, e1, t0, inf) + power_integral(c2, e2, t0, inf)};
  }
  if (c1 <= 0.0 && c2 <= 0.0) return {true, 0.0};
  const double tc = std::pow(-c2 / c1, 1.0 / (e1 - e2));  // single sign change
  if (c1 > 0.0) {
    // positive for t > tc
    const double lo = std::max(t0, tc);
    if (e1 >= -1.0) return {false, inf};
    return {true, power_integral(c1, e1, lo, inf) + power_integral(c2, e2, lo, inf)};
  }
  // c1 < 0 < c2: positive for t < tc
  if (tc <= t0) return {true, 0.0};
  return {true, power_integral(c1, e1, t0, tc) + power_integral(c2, e2, t0, tc)};
}

struct LowerBound {
  bool ok = false;
  double t1 = 0.0;
};

// Does t^theta * gamma(t) >= alpha hold for all t >= some t1 >= t0?
inline LowerBound lower_bound_check(const std::vector<PowerTerm>& s, double alpha, double t0) {
  if (s.empty()) return {};
  const auto [c1, e1] = s[0];
  const PowerTerm rest = s.size() > 1 ? s[1] : PowerTerm{0.0, 0.0};
  if (e1 > 0.0 && c1 > 0.0) {
    // S(t) -> inf; find T with c1 T^{e1} >= alpha + |rest| and rest decayed.
    double t1 = std::max(t0, std::pow((alpha + std::abs(rest.c)) / c1, 1.0 / e1));
    if (rest.c != 0.0 && rest.e > 0.0) {
      // both grow; S >= c1 t^{e1} - |c2| t^{e2} with e2 < e1
      while (eval_terms(s, t1) < alpha) t1 *= 2.0;
    }
    return {true, std::max(t0, t1)};
  }
  if (e1 == 0.0) {
    const double limit = c1;
    if (limit > alpha) {
      if (rest.c >= 0.0) return {true, t0};
      // need |c2| t^{e2} <= limit - alpha  (e2 < 0)
      const double t1 = std::pow(-rest.c / (limit - alpha), -1.0 / rest.e);
      return {true, std::max(t0, t1)};
    }
    if (limit == alpha) {
      if (rest.c >= 0.0) return {true, t0};
      return {};  // approaches alpha from below
    }
    return {};
  }
  return {};  // S(t) -> 0 < alpha
}

}  // namespace detail

/// H4 and Eq.-level assumption checks for the declared (theta, alpha). The
/// catalog families are decided in closed form; failures carry witnesses and
/// are reported, not thrown.
inline DampingHypotheses check_damping_hypotheses(const DampingSchedule& g, double theta,
                                                  double alpha) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw InvalidSpec("check_damping_hypotheses: theta must lie in [0,1]");
  if (!(alpha > 0.0)) throw InvalidSpec("check_damping_hypotheses: alpha must be positive");
  DampingHypotheses out;

  // H4: gamma(t) >= K1/t and gamma'(t) <= K2/t^2 beyond t1. Every catalog
  // family satisfies it; the work is exhibiting constants.
  const double t1 = std::max(g.t0, 1.0);
  switch (g.form) {
    case DampingSchedule::Form::power:
      out.h4_ok = true;
      out.k1 = g.alpha * std::pow(t1, 1.0 - g.theta);
      out.k2 = 1.0;  // derivative is nonpositive
      out.t1_h4 = t1;
      break;
    case DampingSchedule::Form::constant:
      out.h4_ok = true;
      out.k1 = g.g0 * t1;
      out.k2 = 1.0;
      out.t1_h4 = t1;
      break;
    case DampingSchedule::Form::perturbed_power: {
      out.h4_ok = true;
      if (g.delta >= 0.0) {
        out.k1 = g.alpha * std::pow(t1, 1.0 - g.theta);
        out.k2 = 1.0;
        out.t1_h4 = t1;
      } else {
        const double ta =
            std::max(t1, std::pow(2.0 * std::abs(g.delta) / g.alpha, 1.0 / (g.q - g.theta)));
        out.k1 = 0.5 * g.alpha * std::pow(ta, 1.0 - g.theta);
        out.k2 = std::max(1.0, std::abs(g.delta) * g.q * std::pow(ta, 1.0 - g.q));
        out.t1_h4 = ta;
      }
      break;
    }
  }

  const auto weighted = detail::weighted_gamma_terms(g, theta);
  const auto lb = detail::lower_bound_check(weighted, alpha, g.t0);
  out.lower_bound_ok = lb.ok;
  out.t1_lower = lb.t1;
  const auto integral = detail::positive_part_integral(detail::derivative_terms(weighted), g.t0);
  out.positive_part_integrable = integral.finite;
  out.positive_part_integral = integral.value;
  out.assump_ok = out.lower_bound_ok && out.positive_part_integrable;
  if (!out.lower_bound_ok)
    out.note = "t^theta*gamma(t) does not stay >= alpha";
  else if (!out.positive_part_integrable)
    out.note = "positive part of (t^theta*gamma)' is not integrable";
  else
    out.note = "assumption holds; positive-part integral = " + fmt_g(out.positive_part_integral);
  return out;
}

/// Which theorem hypotheses the (gamma, epsilon, theta) triple satisfies.
struct RegimeReport {
  bool h4_ok = false;
  bool h5_ok = false;
  bool assump_ok = false;
  bool p1 = false;      // integral of t^theta * eps finite
  bool p2 = false;      // liminf t^{1+theta} * eps > 0 (common-minimizer side condition reported separately)
  bool strong = false;  // integral of t^theta * eps divergent
  bool alpha_gate = false;
  double alpha = 0.0;
  double theta = 0.0;
  bool numerical = false;
  DampingHypotheses damping;
  std::map<std::string, double> witnesses;
  std::vector<std::string> notes;
};

/// The alpha used by the weak/strong theorems, derived from the family.
inline double derived_alpha(const DampingSchedule& g) {
  switch (g.form) {
    case DampingSchedule::Form::power:
    case DampingSchedule::Form::perturbed_power:
      return g.alpha;
    case DampingSchedule::Form::constant:
      return g.g0;
  }
  return 0.0;
}

inline bool alpha_gate_holds(double theta, double alpha) {
  return theta == 1.0 ? alpha > 3.0 : alpha > 0.0;
}

/// Exact regime classification for the power-law catalog. For power epsilon
/// with exponent p: p1 iff p > 1+theta, p2 and strong iff p <= 1+theta.
inline RegimeReport classify_regime(const DampingSchedule& g, const TikhonovSchedule& e,
                                    double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw InvalidSpec("classify_regime: theta must lie in [0,1]");
  RegimeReport r;
  r.theta = theta;
  r.alpha = derived_alpha(g);
  r.damping = check_damping_hypotheses(g, theta, r.alpha);
  r.h4_ok = r.damping.h4_ok;
  r.assump_ok = r.damping.assump_ok;
  r.alpha_gate = alpha_gate_holds(theta, r.alpha);
  if (!r.alpha_gate)
    r.notes.push_back(theta == 1.0 ? "alpha_gate requires alpha > 3 when theta = 1"
                                   : "alpha_gate requires alpha > 0");
  else if (theta == 1.0 && r.alpha <= 3.1)
    r.notes.push_back("alpha is close to the critical value 3");

  r.witnesses["alpha"] = r.alpha;
  r.witnesses["theta"] = theta;
  r.witnesses["assump_positive_part_integral"] = r.damping.positive_part_integral;

  if (e.is_zero()) {
    r.h5_ok = true;  // degenerate: no selection term
    r.p1 = true;     // integral of t^theta * 0 is 0
    r.p2 = false;
    r.strong = false;
    r.witnesses["liminf_t1ptheta_eps"] = 0.0;
    r.notes.push_back("epsilon is identically zero; plain dynamics");
    return r;
  }

  // power epsilon: all flags exact in the exponent p
  r.h5_ok = true;  // positive, nonincreasing, -> 0 by construction
  const double p = e.p;
  r.p1 = p > 1.0 + theta;
  r.p2 = p <= 1.0 + theta;
  r.strong = p <= 1.0 + theta;
  const double inf = std::numeric_limits<double>::infinity();
  r.witnesses["eps_exponent_p"] = p;
  r.witnesses["int_ttheta_eps_exponent"] = theta - p + 1.0;  // divergent iff >= 0
  r.witnesses["liminf_t1ptheta_eps"] = p < 1.0 + theta ? inf : (p == 1.0 + theta ? e.c : 0.0);
  // Abstract-form control condition: eps/gamma = (c/alpha) t^{gamma_theta - p}
  // for power damping; divergent iff p - gamma_theta <= 1.
  if (g.form != DampingSchedule::Form::perturbed_power) {
    const double gtheta = g.form == DampingSchedule::Form::power ? g.theta : 0.0;
    r.witnesses["eps_over_gamma_exponent"] = gtheta - p;
    r.witnesses["int_eps_over_gamma_diverges"] = (gtheta - p >= -1.0) ? 1.0 : 0.0;
  }
  return r;
}

namespace detail {

// Adaptive Simpson on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

inline double integrate_log_substituted(const std::function<double(double)>& f, double t_lo,
                                        double t_hi, double rel_tol) {
  // integral of f(t) dt = integral of f(e^u) e^u du
  auto g = [&f](double u) {
    const double t = std::exp(u);
    return f(t) * t;
  };
  const double a = std::log(t_lo), b = std::log(t_hi);
  double total = 0.0;
  // split per decade to keep the recursion shallow
  const int segments = std::max(1, static_cast<int>(std::ceil((b - a) / std::log(10.0))));
  for (int i = 0; i < segments; ++i) {
    const double lo = a + (b - a) * i / segments;
    const double hi = a + (b - a) * (i + 1) / segments;
    const double mid = 0.5 * (lo + hi);
    const double glo = g(lo), gmid = g(mid), ghi = g(hi);
    const double rough = (hi - lo) / 6.0 * (glo + 4.0 * gmid + ghi);
    const double tol = std::abs(rough) * rel_tol + 1e-30;
    total += adaptive_simpson(g, lo, hi, glo, gmid, ghi, tol, 24);
  }
  return total;
}

// Local log-log slope of |f| near t (one decade below t).
inline double tail_exponent(const std::function<double(double)>& f, double t) {
  const double lo = t / 10.0;
  const double f_lo = std::abs(f(lo)), f_hi = std::abs(f(t));
  if (f_lo <= 1e-300 || f_hi <= 1e-300) return -std::numeric_limits<double>::infinity();
  return std::log(f_hi / f_lo) / std::log(t / lo);
}

}  // namespace detail

/// Quadrature fallback for damping hypotheses when the schedule is not one of
/// the closed-form families. Integrates [(t^theta*gamma)']^+ on [t0, t_quad]
/// and bounds the tail with a fitted exponent; the result is marked numerical.
inline DampingHypotheses check_damping_hypotheses_numerical(
    const std::function<double(double)>& gamma, const std::function<double(double)>& dgamma,
    double theta, double alpha, double t0, double t_quad = 1e8) {
  DampingHypotheses out;
  out.numerical = true;
  auto weighted_derivative = [&](double t) {
    const double d = theta * std::pow(t, theta - 1.0) * gamma(t) + std::pow(t, theta) * dgamma(t);
    return std::max(0.0, d);
  };
  out.positive_part_integral =
      detail::integrate_log_substituted(weighted_derivative, t0, t_quad, 1e-12);
  const double tail_e = detail::tail_exponent(weighted_derivative, t_quad);
  if (tail_e < -1.02) {
    const double d_end = weighted_derivative(t_quad);
    out.positive_part_integrable = true;
    out.positive_part_integral += d_end * t_quad / (-tail_e - 1.0);
  } else {
    const double d_end = weighted_derivative(t_quad);
    out.positive_part_integrable = d_end <= 1e-300;
  }

  // gamma(t) >= alpha/t^theta sampled on a log grid, then trend at the end.
  out.lower_bound_ok = true;
  out.t1_lower = t0;
  const int steps = 200;
  bool seen_fail = false;
  for (int i = 0; i <= steps; ++i) {
    const double t = t0 * std::pow(t_quad / t0, static_cast<double>(i) / steps);
    const double s = std::pow(t, theta) * gamma(t);
    if (s < alpha * (1.0 - 1e-12)) {
      seen_fail = true;
      out.t1_lower = t;
    }
  }
  if (seen_fail) {
    // only a failure that persists at the far end disqualifies
    const double s_end = std::pow(t_quad, theta) * gamma(t_quad);
    out.lower_bound_ok = s_end >= alpha * (1.0 - 1e-12) && out.t1_lower < t_quad / 100.0;
    if (out.lower_bound_ok) out.t1_lower *= 2.0;
  }
  out.h4_ok = out.lower_bound_ok;  // gamma >= alpha/t^theta >= (alpha t1^{1-theta})/t
  out.k1 = alpha;
  out.k2 = 1.0;
  out.t1_h4 = out.t1_lower;
  out.assump_ok = out.lower_bound_ok && out.positive_part_integrable;
  out.note = "numerical quadrature on [t0, " + fmt_g(t_quad) + "], tail exponent " +
             fmt_g(tail_e);
  return out;
}

/// Quadrature fallback classifying a generic epsilon(t); marked numerical.
inline RegimeReport classify_regime_numerical(const DampingSchedule& g,
                                              const std::function<double(double)>& eps,
                                              double theta, double t0, double t_quad = 1e8) {
  RegimeReport r;
  r.theta = theta;
  r.alpha = derived_alpha(g);
  r.damping = check_damping_hypotheses(g, theta, r.alpha);
  r.h4_ok = r.damping.h4_ok;
  r.assump_ok = r.damping.assump_ok;
  r.alpha_gate = alpha_gate_holds(theta, r.alpha);
  r.numerical = true;
  r.h5_ok = true;
  auto weighted = [&](double t) { return std::pow(t, theta) * eps(t); };
  const double partial = detail::integrate_log_substituted(weighted, t0, t_quad, 1e-12);
  const double tail_e = detail::tail_exponent(weighted, t_quad);
  r.witnesses["partial_int_ttheta_eps"] = partial;
  r.witnesses["tail_exponent"] = tail_e;
  const bool finite = tail_e < -1.02;
  r.p1 = finite;
  r.strong = !finite;
  const double liminf_proxy = std::pow(t_quad, 1.0 + theta) * eps(t_quad);
  r.witnesses["liminf_t1ptheta_eps"] = liminf_proxy;
  r.p2 = liminf_proxy > 1e-6;
  r.notes.push_back("flags decided by quadrature to t_quad and a tail exponent fit");
  return r;
}

}  // namespace tikdyn

#endif
