// Command-line front end: `run` executes a config end to end, `check` reports
// the hypothesis/regime flags without integrating, `rates` refits decay
// exponents from a previously written trajectory.csv.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tikdyn/config.hpp"
#include "tikdyn/experiment.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string default_out_root() {
  if (const char* env = std::getenv("TIKDYN_OUT_ROOT")) return env;
  return "tikdyn_out";
}

int run_one(const std::string& config_path, const fs::path& out_dir, bool quiet) {
  tikdyn::ExperimentConfig cfg = tikdyn::parse_config(slurp(config_path));
  const auto report = tikdyn::run_experiment(cfg, out_dir);
  std::ostringstream out;
  out << config_path << " -> " << out_dir.string() << "\n";
  for (const auto& w : report.warnings) out << "  warning: " << w << "\n";
  for (const auto& c : report.checks) {
    out << "  " << c.name << ": " << tikdyn::to_string(c.status);
    if (!c.note.empty()) out << "  (" << c.note << ")";
    out << "\n";
    for (const auto& [k, v] : c.witnesses)
      out << "      " << k << " = " << tikdyn::fmt_g(v) << "\n";
  }
  if (!quiet) std::cout << out.str();
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertial gradient dynamics with vanishing damping and a Tikhonov selection term"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out_root = default_out_root();
  bool batch = false;
  auto* run = app.add_subcommand("run", "run experiments from config files");
  run->add_option("config", configs, "config file(s)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_root, "output directory (root when several configs are given)");
  run->add_flag("--batch", batch, "run several configs concurrently");

  std::string check_config;
  auto* check = app.add_subcommand("check", "hypothesis and regime checks only, no integration");
  check->add_option("config", check_config, "config file")->required()->check(CLI::ExistingFile);

  std::string rates_csv;
  double rates_theta = 0.0;
  double rates_window = 1.0;
  std::string rates_out;
  auto* rates = app.add_subcommand("rates", "fit tail decay exponents from a trajectory.csv");
  rates->add_option("trajectory", rates_csv, "trajectory.csv produced by run")
      ->required()
      ->check(CLI::ExistingFile);
  rates->add_option("--theta", rates_theta, "theta used for the t^(1+theta) weighting")
      ->required();
  rates->add_option("--window", rates_window, "tail window in log-decades")
      ->capture_default_str();
  rates->add_option("--out", rates_out, "write rates.csv here as well");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const bool single = configs.size() == 1 && !batch;
      if (single) return run_one(configs[0], fs::path(out_root), false);
      std::vector<std::pair<std::string, fs::path>> jobs;
      for (const auto& c : configs)
        jobs.emplace_back(c, fs::path(out_root) / fs::path(c).stem());
      int rc = 0;
      if (batch) {
        std::vector<std::future<int>> futures;
        for (const auto& [c, dir] : jobs)
          futures.push_back(
              std::async(std::launch::async, [c = c, dir = dir] { return run_one(c, dir, false); }));
        for (auto& f : futures) rc |= f.get();
      } else {
        for (const auto& [c, dir] : jobs) rc |= run_one(c, dir, false);
      }
      return rc;
    }

    if (check->parsed()) {
      tikdyn::ExperimentConfig cfg = tikdyn::parse_config(slurp(check_config));
      const auto regime = tikdyn::classify_regime(cfg.gamma, cfg.epsilon, cfg.theta);
      for (const auto& w : cfg.warnings) std::cout << "warning: " << w << "\n";
      auto flag = [](bool b) { return b ? "true" : "false"; };
      std::cout << "h4_ok = " << flag(regime.h4_ok) << "\n"
                << "h5_ok = " << flag(regime.h5_ok) << "\n"
                << "assump_ok = " << flag(regime.assump_ok) << "  (" << regime.damping.note
                << ")\n"
                << "alpha_gate = " << flag(regime.alpha_gate) << "  (alpha = "
                << tikdyn::fmt_g(regime.alpha) << ", theta = " << tikdyn::fmt_g(regime.theta)
                << ")\n"
                << "p1 = " << flag(regime.p1) << "\n"
                << "p2 = " << flag(regime.p2) << "\n"
                << "strong = " << flag(regime.strong) << "\n";
      for (const auto& [k, v] : regime.witnesses)
        std::cout << "  " << k << " = " << tikdyn::fmt_g(v) << "\n";
      for (const auto& n : regime.notes) std::cout << "  note: " << n << "\n";
      return regime.h4_ok && regime.h5_ok && regime.assump_ok && regime.alpha_gate ? 0 : 1;
    }

    if (rates->parsed()) {
      const auto cols = tikdyn::read_trajectory_csv(rates_csv);
      std::vector<std::pair<std::string, tikdyn::RateEstimate>> rows;
      rows.emplace_back("W_plain",
                        tikdyn::estimate_decay_exponent(cols.w_plain, rates_window, rates_theta));
      try {
        rows.emplace_back(
            "speed_norm",
            tikdyn::estimate_decay_exponent(cols.speed, rates_window, rates_theta));
      } catch (const tikdyn::InsufficientData&) {
      }
      std::cout << "series,exponent,r_squared,window_lo,window_hi,weighted_tail_sup\n";
      for (const auto& [name, est] : rows)
        std::cout << name << ',' << tikdyn::fmt_g17(est.exponent) << ','
                  << tikdyn::fmt_g17(est.r_squared) << ',' << tikdyn::fmt_g17(est.window_lo)
                  << ',' << tikdyn::fmt_g17(est.window_hi) << ','
                  << tikdyn::fmt_g17(est.weighted_tail_sup) << "\n";
      if (!rates_out.empty()) tikdyn::exp_detail::write_rates_csv(rates_out, rows);
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
