#ifndef TIKDYN_EXPERIMENT_HPP
#define TIKDYN_EXPERIMENT_HPP

#include <array>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tikdyn/common.hpp"
#include "tikdyn/config.hpp"
#include "tikdyn/convex.hpp"
#include "tikdyn/diagnostics.hpp"
#include "tikdyn/integrate.hpp"
#include "tikdyn/schedules.hpp"
#include "tikdyn/svg_plot.hpp"
#include "tikdyn/tikhonov.hpp"

namespace tikdyn {

struct CheckResult {
  std::string name;
  enum class Status { pass, fail, not_applicable } status = Status::not_applicable;
  std::map<std::string, double> witnesses;
  std::string note;
};

inline std::string to_string(CheckResult::Status s) {
  switch (s) {
    case CheckResult::Status::pass: return "pass";
    case CheckResult::Status::fail: return "fail";
    case CheckResult::Status::not_applicable: return "not_applicable";
  }
  return "?";
}

struct VerdictReport {
  std::vector<CheckResult> checks;
  RegimeReport regime;
  std::optional<RateEstimate> rate;
  std::optional<ConvergenceReport> convergence;
  SolverMeta solver;
  bool trajectory_complete = true;
  std::vector<std::string> files;
  std::vector<std::string> warnings;

  bool all_passed() const {
    for (const auto& c : checks)
      if (c.status == CheckResult::Status::fail) return false;
    return true;
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Thresholds used by the verdicts; fixed once here.
namespace gates {
inline constexpr double energy_ratio = 1e-4;          // W_plain(T) / W_plain(t0)
inline constexpr double speed_tail_ratio = 1e-3;      // damped-speed integral tail
inline constexpr double identity_residual = 1e-3;     // energy-derivative identity
inline constexpr double rate_slope_margin = 0.1;      // slope <= -(1+theta) + margin
inline constexpr double dist_s_phi = 1e-3;            // residual distance to argmin Phi
inline constexpr double dist_x_star = 0.05;           // strong-convergence distance
inline constexpr double u_gap = 1e-3;                 // U(x(T)) - U* in the common-minimizer regime
inline constexpr double membership = 1e-9;            // "x_star lies in argmin Phi"
}  // namespace gates

namespace exp_detail {

inline void csv_cell(std::string& row, std::optional<double> v) {
  row += ',';
  if (v) row += fmt_g17(*v);
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                                 const ProblemInstance& p, double theta) {
  std::ofstream out(path, std::ios::binary);
  out << "t,W_plain,W_full,speed_norm,dist_x_star,dist_p_star,dist_s_phi,t_pow_W\n";
  for (const auto& s : traj.samples) {
    std::string row = fmt_g17(s.state.t);
    row += ',' + fmt_g17(s.w_plain);
    row += ',' + fmt_g17(s.w_full);
    row += ',' + fmt_g17(s.state.v.norm());
    csv_cell(row, p.x_star ? std::optional<double>((s.state.x - *p.x_star).norm())
                           : std::nullopt);
    csv_cell(row, p.p_star ? std::optional<double>((s.state.x - *p.p_star).norm())
                           : std::nullopt);
    csv_cell(row, p.s_phi.projectable()
                      ? std::optional<double>((s.state.x - project_argmin(p, s.state.x)).norm())
                      : std::nullopt);
    row += ',' + fmt_g17(std::pow(s.state.t, 1.0 + theta) * s.w_plain);
    out << row << '\n';
  }
}

inline void write_rates_csv(const std::filesystem::path& path,
                            const std::vector<std::pair<std::string, RateEstimate>>& rows) {
  std::ofstream out(path, std::ios::binary);
  out << "series,exponent,r_squared,window_lo,window_hi,weighted_tail_sup\n";
  for (const auto& [name, est] : rows)
    out << name << ',' << fmt_g17(est.exponent) << ',' << fmt_g17(est.r_squared) << ','
        << fmt_g17(est.window_lo) << ',' << fmt_g17(est.window_hi) << ','
        << fmt_g17(est.weighted_tail_sup) << '\n';
}

inline nlohmann::ordered_json regime_json(const RegimeReport& r) {
  nlohmann::ordered_json j;
  j["h4_ok"] = r.h4_ok;
  j["h5_ok"] = r.h5_ok;
  j["assump_ok"] = r.assump_ok;
  j["p1"] = r.p1;
  j["p2"] = r.p2;
  j["strong"] = r.strong;
  j["alpha_gate"] = r.alpha_gate;
  j["alpha"] = r.alpha;
  j["theta"] = r.theta;
  j["numerical"] = r.numerical;
  j["h4_witnesses"] = {{"k1", r.damping.k1}, {"k2", r.damping.k2}, {"t1", r.damping.t1_h4}};
  j["assump_witnesses"] = {{"lower_bound_ok", r.damping.lower_bound_ok},
                           {"t1_lower", r.damping.t1_lower},
                           {"positive_part_integral", r.damping.positive_part_integral},
                           {"note", r.damping.note}};
  for (const auto& [k, v] : r.witnesses) j["witnesses"][k] = v;
  j["notes"] = r.notes;
  return j;
}

}  // namespace exp_detail

/// Rate and true decay proxy for a little-o claim: either the fitted tail
/// slope clears -(1+theta) with margin, or the windowed sup of t^{1+theta} W
/// strictly decreased across the last two decades.
struct RateVerdict {
  bool ok = false;
  bool slope_ok = false;
  bool sup_decrease_ok = false;
  double sup_recent = 0.0, sup_previous = 0.0;
};

inline RateVerdict rate_verdict(const std::vector<std::pair<double, double>>& series,
                                const RateEstimate& est, double theta) {
  RateVerdict v;
  v.slope_ok = est.exponent <= -(1.0 + theta) + gates::rate_slope_margin;
  const double T = series.back().first;
  v.sup_recent = windowed_weighted_sup(series, T / 10.0, T, 1.0 + theta);
  v.sup_previous = windowed_weighted_sup(series, T / 100.0, T / 10.0, 1.0 + theta);
  v.sup_decrease_ok = v.sup_previous > 0.0 && v.sup_recent < v.sup_previous;
  v.ok = v.slope_ok || v.sup_decrease_ok;
  return v;
}

/// Run hypothesis checks, the integration, diagnostics, and the Tikhonov
/// path; write trajectory.csv, rates.csv, report.json, and the SVG figures
/// into out_dir. Deterministic: identical configs produce identical bytes.
inline VerdictReport run_experiment(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  VerdictReport report;
  report.warnings = cfg.warnings;

  const ProblemInstance problem = build_problem(cfg.problem);
  report.regime = classify_regime(cfg.gamma, cfg.epsilon, cfg.theta);

  const bool x_star_in_s_phi =
      problem.x_star && problem.s_phi.projectable() &&
      (*problem.x_star - project_argmin(problem, *problem.x_star)).norm() <= gates::membership;

  // Enabled-check / regime consistency produces warnings, not failures.
  auto warn_if = [&](bool enabled, bool inconsistent, const std::string& msg) {
    if (enabled && inconsistent) report.warnings.push_back(msg);
  };
  warn_if(cfg.checks.count(Check::weak_p1), !report.regime.p1,
          "weak_p1 enabled but the schedule is not in the P1 regime");
  warn_if(cfg.checks.count(Check::weak_p2), !report.regime.p2,
          "weak_p2 enabled but the schedule is not in the P2 regime");
  warn_if(cfg.checks.count(Check::strong_q2), !report.regime.strong,
          "strong_q2 enabled but the weighted Tikhonov integral converges");
  warn_if(cfg.checks.count(Check::strong_q2), !x_star_in_s_phi,
          "strong_q2 enabled but x_star is unknown or not a minimizer of Phi");
  warn_if(cfg.checks.count(Check::remark_unbounded),
          problem.s_phi.kind != ArgminSet::Kind::empty,
          "remark_unbounded enabled but argmin Phi is not empty");
  warn_if(cfg.checks.count(Check::tikhonov_path), !problem.p_star.has_value(),
          "tikhonov_path enabled but p_star is unavailable");

  const bool needs_trajectory =
      cfg.checks.count(Check::general) || cfg.checks.count(Check::weak_p1) ||
      cfg.checks.count(Check::weak_p2) || cfg.checks.count(Check::strong_q2) ||
      cfg.checks.count(Check::remark_unbounded) || cfg.checks.count(Check::q1_witnesses);

  std::optional<Trajectory> traj;
  std::string blow_up_note;
  if (needs_trajectory) {
    IntegrateOptions opts;
    opts.t_end = cfg.t_end;
    opts.abs_tol = cfg.abs_tol;
    opts.rel_tol = cfg.rel_tol;
    opts.samples_per_decade = cfg.samples_per_decade;
    opts.max_steps = cfg.max_steps;
    State init{std::max(cfg.gamma.t0, cfg.epsilon.t0), cfg.x0, cfg.v0};
    try {
      traj = integrate(problem, cfg.gamma, cfg.epsilon, init, opts);
    } catch (const BlowUpError& ex) {
      blow_up_note = ex.what();
      if (ex.partial_trajectory) traj = *ex.partial_trajectory;
    }
  }

  std::vector<std::pair<std::string, RateEstimate>> rate_rows;
  std::optional<RateVerdict> rates_ok;
  std::vector<std::pair<double, double>> w_series;
  if (traj) {
    report.solver = traj->meta;
    report.trajectory_complete = traj->complete && blow_up_note.empty();
    if (traj->samples.size() >= 2)
      report.convergence = convergence_report(*traj, problem, cfg.theta);
    w_series = w_plain_series(*traj);
    try {
      RateEstimate est = estimate_decay_exponent(w_series, cfg.rate_window_decades, cfg.theta);
      report.rate = est;
      rate_rows.emplace_back("W_plain", est);
      rates_ok = rate_verdict(w_series, est, cfg.theta);
    } catch (const InsufficientData&) {
    }
    try {
      rate_rows.emplace_back(
          "speed_norm",
          estimate_decay_exponent(speed_series(*traj), cfg.rate_window_decades, cfg.theta));
    } catch (const InsufficientData&) {
    }
  }

  auto add_check = [&](Check c) -> CheckResult* {
    if (!cfg.checks.count(c)) return nullptr;
    report.checks.push_back(CheckResult{to_string(c)});
    return &report.checks.back();
  };
  auto fail_if_no_trajectory = [&](CheckResult* r) {
    if (!r) return true;
    if (!traj || traj->samples.size() < 3 || !report.trajectory_complete) {
      r->status = CheckResult::Status::fail;
      r->note = blow_up_note.empty() ? "trajectory incomplete" : blow_up_note;
      return true;
    }
    return false;
  };

  if (auto* r = add_check(Check::general); r) {
    if (!fail_if_no_trajectory(r)) {
      const auto mono = check_energy_dissipation(*traj);
      const double residual = energy_identity_residual(*traj, problem, cfg.gamma, cfg.epsilon);
      const double w0 = traj->samples.front().w_plain;
      const double wT = traj->samples.back().w_plain;
      const double ratio = wT / std::max(w0, 1e-300);
      const double tail = report.convergence->damped_speed_integral_tail_ratio;
      r->witnesses["w_full_max_increase"] = mono.max_increase;
      r->witnesses["w_full_slack"] = mono.slack;
      r->witnesses["identity_residual"] = residual;
      r->witnesses["w_plain_ratio"] = ratio;
      r->witnesses["speed_integral_tail_ratio"] = tail;
      const bool ok = mono.ok && residual <= gates::identity_residual &&
                      ratio <= gates::energy_ratio && tail <= gates::speed_tail_ratio;
      r->status = ok ? CheckResult::Status::pass : CheckResult::Status::fail;
      if (traj->estimated_infimum) r->note = "estimated infimum";
    }
  }

  const bool theorem_gate =
      report.regime.h4_ok && report.regime.assump_ok && report.regime.alpha_gate;

  if (auto* r = add_check(Check::weak_p1); r) {
    if (!(report.regime.p1 && theorem_gate)) {
      r->status = CheckResult::Status::not_applicable;
      r->note = "P1 hypotheses do not hold for this schedule";
    } else if (!fail_if_no_trajectory(r)) {
      bool ok = rates_ok && rates_ok->ok;
      if (rates_ok) {
        r->witnesses["rate_exponent"] = report.rate->exponent;
        r->witnesses["sup_t1ptheta_w_recent"] = rates_ok->sup_recent;
        r->witnesses["sup_t1ptheta_w_previous"] = rates_ok->sup_previous;
      }
      if (report.convergence->dist_to_s_phi) {
        r->witnesses["dist_to_s_phi"] = *report.convergence->dist_to_s_phi;
        ok = ok && *report.convergence->dist_to_s_phi <= gates::dist_s_phi;
      } else {
        r->note = "argmin Phi has no computable projection; rate only";
      }
      r->status = ok ? CheckResult::Status::pass : CheckResult::Status::fail;
    }
  }

  if (auto* r = add_check(Check::weak_p2); r) {
    if (!(report.regime.p2 && theorem_gate && x_star_in_s_phi)) {
      r->status = CheckResult::Status::not_applicable;
      r->note = "needs the P2 regime and a common minimizer of Phi and U";
    } else if (!fail_if_no_trajectory(r)) {
      const double gap = report.convergence->u_gap_final;
      r->witnesses["u_gap_final"] = gap;
      if (rates_ok) r->witnesses["rate_exponent"] = report.rate->exponent;
      const bool ok = gap <= gates::u_gap && rates_ok && rates_ok->ok;
      r->status = ok ? CheckResult::Status::pass : CheckResult::Status::fail;
    }
  }

  if (auto* r = add_check(Check::strong_q2); r) {
    const bool gamma_is_pure_power = cfg.gamma.form == DampingSchedule::Form::power &&
                                     cfg.gamma.theta == cfg.theta;
    if (!(report.regime.strong && report.regime.alpha_gate && gamma_is_pure_power &&
          x_star_in_s_phi)) {
      r->status = CheckResult::Status::not_applicable;
      r->note = "needs the divergent-integral regime, gamma = alpha/t^theta, and x_star in "
                "argmin Phi";
    } else if (!fail_if_no_trajectory(r)) {
      const double dist = report.convergence->dist_to_x_star.value_or(
          std::numeric_limits<double>::infinity());
      r->witnesses["dist_to_x_star"] = dist;
      if (rates_ok) r->witnesses["rate_exponent"] = report.rate->exponent;
      r->status = dist <= gates::dist_x_star ? CheckResult::Status::pass
                                             : CheckResult::Status::fail;
    }
  }

  if (auto* r = add_check(Check::remark_unbounded); r) {
    if (problem.s_phi.kind != ArgminSet::Kind::empty) {
      r->status = CheckResult::Status::not_applicable;
      r->note = "argmin Phi is nonempty";
    } else if (!fail_if_no_trajectory(r)) {
      r->witnesses["norm_initial"] = report.convergence->norm_initial;
      r->witnesses["norm_final"] = report.convergence->norm_final;
      r->witnesses["growth_ratio"] = report.convergence->growth_ratio;
      r->status = report.convergence->unbounded_flag ? CheckResult::Status::pass
                                                     : CheckResult::Status::fail;
    }
  }

  if (auto* r = add_check(Check::q1_witnesses); r) {
    if (!fail_if_no_trajectory(r)) {
      r->witnesses["tail_sup_ttheta_speed"] = report.convergence->q1.tail_sup_weighted_speed;
      r->witnesses["int_ttheta_speed_sq"] = report.convergence->q1.weighted_speed_integral;
      r->witnesses["int_ttheta_speed_sq_tail_ratio"] =
          report.convergence->q1.weighted_speed_integral_tail_ratio;
      r->status = CheckResult::Status::pass;
      r->note = "witnesses only; the strong-convergence hypotheses are not asserted from data";
    }
  }

  if (auto* r = add_check(Check::tikhonov_path); r) {
    if (!problem.p_star || !(problem.u.strong_convexity_modulus > 0.0)) {
      r->status = CheckResult::Status::not_applicable;
      r->note = "needs strongly convex U and a computable p_star";
    } else {
      try {
        const auto curve = tikhonov_curve(problem, cfg.tikhonov_grid);
        r->witnesses["final_dist_to_p_star"] = curve.verdict.final_dist;
        r->witnesses["worst_t1_slack"] = curve.verdict.worst_t1_slack;
        r->witnesses["worst_t2_slack"] = curve.verdict.worst_t2_slack;
        r->witnesses["points"] = static_cast<double>(curve.points.size());
        const bool ok = curve.verdict.t1_all && curve.verdict.t2_all &&
                        curve.verdict.monotone_tail &&
                        curve.verdict.final_dist <= cfg.tikhonov_dist_tol;
        r->status = ok ? CheckResult::Status::pass : CheckResult::Status::fail;
      } catch (const std::exception& ex) {
        r->status = CheckResult::Status::fail;
        r->note = ex.what();
      }
    }
  }

  // artifacts
  if (traj && !traj->samples.empty()) {
    exp_detail::write_trajectory_csv(out_dir / "trajectory.csv", *traj, problem, cfg.theta);
    report.files.push_back("trajectory.csv");
    if (!rate_rows.empty()) {
      exp_detail::write_rates_csv(out_dir / "rates.csv", rate_rows);
      report.files.push_back("rates.csv");
    }
    {
      std::vector<PlotSeries> series;
      PlotSeries wp{"W_plain", w_series, "#1f77b4"};
      PlotSeries wf{"W_full", {}, "#d62728"};
      for (const auto& s : traj->samples) wf.points.emplace_back(s.state.t, s.w_full);
      series.push_back(std::move(wp));
      series.push_back(std::move(wf));
      write_loglog_svg((out_dir / "energy_loglog.svg").string(), "Energy decay", "t", "W",
                       series);
      report.files.push_back("energy_loglog.svg");
    }
    if (problem.x_star) {
      PlotSeries d{"|x - x_star|", {}, "#2ca02c"};
      for (const auto& s : traj->samples)
        d.points.emplace_back(s.state.t, (s.state.x - *problem.x_star).norm());
      write_loglog_svg((out_dir / "distance_loglog.svg").string(),
                       "Distance to the minimizer of U", "t", "|x - x_star|", {d});
      report.files.push_back("distance_loglog.svg");
    }
  }

  {
    nlohmann::ordered_json j;
    j["config"] = render_config(cfg);
    j["regime"] = exp_detail::regime_json(report.regime);
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
      nlohmann::ordered_json cj;
      cj["name"] = c.name;
      cj["status"] = to_string(c.status);
      cj["witnesses"] = c.witnesses;
      if (!c.note.empty()) cj["note"] = c.note;
      j["checks"].push_back(cj);
    }
    if (report.rate) {
      j["rate"] = {{"exponent", report.rate->exponent},
                   {"r_squared", report.rate->r_squared},
                   {"window_lo", report.rate->window_lo},
                   {"window_hi", report.rate->window_hi},
                   {"weighted_tail_sup", report.rate->weighted_tail_sup},
                   {"points_used", report.rate->points_used},
                   {"points_dropped", report.rate->points_dropped}};
    }
    if (report.convergence) {
      nlohmann::ordered_json cj;
      cj["t_final"] = report.convergence->t_final;
      cj["norm_final"] = report.convergence->norm_final;
      if (report.convergence->dist_to_x_star)
        cj["dist_to_x_star"] = *report.convergence->dist_to_x_star;
      if (report.convergence->dist_to_p_star)
        cj["dist_to_p_star"] = *report.convergence->dist_to_p_star;
      if (report.convergence->dist_to_s_phi)
        cj["dist_to_s_phi"] = *report.convergence->dist_to_s_phi;
      cj["damped_speed_integral"] = report.convergence->damped_speed_integral_total;
      cj["damped_speed_integral_tail_ratio"] =
          report.convergence->damped_speed_integral_tail_ratio;
      cj["u_gap_final"] = report.convergence->u_gap_final;
      cj["unbounded_flag"] = report.convergence->unbounded_flag;
      j["convergence"] = cj;
    }
    if (traj) {
      j["solver"] = {{"method", report.solver.method},
                     {"abs_tol", report.solver.abs_tol},
                     {"rel_tol", report.solver.rel_tol},
                     {"steps_accepted", report.solver.steps_accepted},
                     {"steps_rejected", report.solver.steps_rejected},
                     {"rhs_evaluations", report.solver.rhs_evaluations},
                     {"complete", report.trajectory_complete}};
    }
    j["warnings"] = report.warnings;
    report.files.push_back("report.json");
    j["files"] = report.files;
    std::ofstream out(out_dir / "report.json", std::ios::binary);
    out << j.dump(2) << '\n';
  }
  return report;
}

/// Columns needed by the `rates` subcommand.
struct TrajectoryColumns {
  std::vector<std::pair<double, double>> w_plain;    // (t, W_plain)
  std::vector<std::pair<double, double>> speed;      // (t, speed_norm)
};

inline TrajectoryColumns read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidSpec("empty trajectory file");
  if (line.rfind("t,W_plain,W_full,speed_norm", 0) != 0)
    throw InvalidSpec("unexpected trajectory.csv header");
  TrajectoryColumns cols;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 4> vals{};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
      const auto comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma - pos);
      vals[static_cast<std::size_t>(i)] = std::stod(cell);
      if (comma == std::string::npos && i < 3) throw InvalidSpec("short row in trajectory.csv");
      pos = comma + 1;
    }
    cols.w_plain.emplace_back(vals[0], vals[1]);
    cols.speed.emplace_back(vals[0], vals[3]);
  }
  return cols;
}

}  // namespace tikdyn

#endif
