#ifndef TIKDYN_CONFIG_HPP
#define TIKDYN_CONFIG_HPP

#include <cctype>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tikdyn/common.hpp"
#include "tikdyn/convex.hpp"
#include "tikdyn/schedules.hpp"

namespace tikdyn {

/// Parse failure; message carries the offending line number or key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Check {
  general,
  weak_p1,
  weak_p2,
  strong_q2,
  remark_unbounded,
  tikhonov_path,
  q1_witnesses,
};

inline const std::vector<std::pair<Check, std::string>>& check_names() {
  static const std::vector<std::pair<Check, std::string>> names = {
      {Check::general, "general"},
      {Check::weak_p1, "weak_p1"},
      {Check::weak_p2, "weak_p2"},
      {Check::strong_q2, "strong_q2"},
      {Check::remark_unbounded, "remark_unbounded"},
      {Check::tikhonov_path, "tikhonov_path"},
      {Check::q1_witnesses, "q1_witnesses"},
  };
  return names;
}

inline std::string to_string(Check c) {
  for (const auto& [check, name] : check_names())
    if (check == c) return name;
  return "?";
}

struct ExperimentConfig {
  ProblemSpec problem;
  DampingSchedule gamma;
  TikhonovSchedule epsilon;
  double theta = 1.0;
  double t0 = 1.0;
  Vec x0;
  Vec v0;
  double t_end = 1e4;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  int samples_per_decade = 50;
  long max_steps = 20000000;
  double rate_window_decades = 1.0;
  double tikhonov_dist_tol = 0.01;
  std::vector<double> tikhonov_grid = {1.0, 0.1, 0.01, 1e-3, 1e-4};
  std::set<Check> checks = {Check::general,          Check::weak_p1,       Check::weak_p2,
                            Check::strong_q2,        Check::remark_unbounded,
                            Check::tikhonov_path,    Check::q1_witnesses};
  std::vector<std::string> warnings;  // non-fatal notes collected while parsing
};

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  auto fn_eq = [](const FunctionSpec& x, const FunctionSpec& y) {
    return x.family == y.family && x.dim == y.dim && x.rows == y.rows &&
           x.matrix.rows() == y.matrix.rows() && x.matrix.cols() == y.matrix.cols() &&
           (x.matrix.size() == 0 || x.matrix == y.matrix) &&
           x.vector.size() == y.vector.size() && (x.vector.size() == 0 || x.vector == y.vector);
  };
  return fn_eq(a.problem.phi, b.problem.phi) && fn_eq(a.problem.u, b.problem.u) &&
         a.gamma.form == b.gamma.form && a.gamma.alpha == b.gamma.alpha &&
         a.gamma.theta == b.gamma.theta && a.gamma.g0 == b.gamma.g0 &&
         a.gamma.delta == b.gamma.delta && a.gamma.q == b.gamma.q && a.gamma.t0 == b.gamma.t0 &&
         a.epsilon.form == b.epsilon.form && a.epsilon.c == b.epsilon.c &&
         a.epsilon.p == b.epsilon.p && a.epsilon.t0 == b.epsilon.t0 && a.theta == b.theta &&
         a.t0 == b.t0 && a.x0 == b.x0 && a.v0 == b.v0 && a.t_end == b.t_end &&
         a.abs_tol == b.abs_tol && a.rel_tol == b.rel_tol &&
         a.samples_per_decade == b.samples_per_decade && a.max_steps == b.max_steps &&
         a.rate_window_decades == b.rate_window_decades &&
         a.tikhonov_dist_tol == b.tikhonov_dist_tol && a.tikhonov_grid == b.tikhonov_grid &&
         a.checks == b.checks;
}

namespace cfg_detail {

struct Ctor {
  std::string name;
  std::vector<std::pair<std::string, struct Value>> args;
};

struct Value {
  // number | identifier | list of numbers | list of identifiers | constructor
  std::variant<double, std::string, std::vector<double>, std::vector<std::string>,
               std::shared_ptr<Ctor>>
      v;
};

class Lexer {
 public:
  Lexer(std::string_view text, int line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool eof() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected an identifier");
    return std::string(s_.substr(start, pos_ - start));
  }
  double number() {
    skip_ws();
    const char* begin = s_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }
  bool looks_numeric() {
    char c = peek();
    return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
  }
  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("line " + std::to_string(line_) + ": " + what);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

inline Value parse_value(Lexer& lx);

inline Value parse_list(Lexer& lx) {
  lx.expect('[');
  Value out;
  if (lx.accept(']')) {
    out.v = std::vector<double>{};
    return out;
  }
  if (lx.looks_numeric()) {
    std::vector<double> nums;
    nums.push_back(lx.number());
    while (lx.accept(',')) nums.push_back(lx.number());
    lx.expect(']');
    out.v = std::move(nums);
  } else {
    std::vector<std::string> ids;
    ids.push_back(lx.ident());
    while (lx.accept(',')) ids.push_back(lx.ident());
    lx.expect(']');
    out.v = std::move(ids);
  }
  return out;
}

inline Value parse_value(Lexer& lx) {
  if (lx.peek() == '[') return parse_list(lx);
  if (lx.looks_numeric()) {
    Value out;
    out.v = lx.number();
    return out;
  }
  std::string name = lx.ident();
  if (lx.peek() != '(') {
    Value out;
    out.v = std::move(name);
    return out;
  }
  lx.expect('(');
  auto ctor = std::make_shared<Ctor>();
  ctor->name = std::move(name);
  if (!lx.accept(')')) {
    do {
      std::string key = lx.ident();
      lx.expect('=');
      ctor->args.emplace_back(std::move(key), parse_value(lx));
    } while (lx.accept(','));
    lx.expect(')');
  }
  Value out;
  out.v = std::move(ctor);
  return out;
}

struct RawConfig {
  std::map<std::string, std::pair<Value, int>> entries;  // key -> (value, line)
};

inline RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char c : line)
      if (c != ' ' && c != '\t' && c != '\r') blank = false;
    if (blank) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    Lexer klex(std::string_view(line).substr(0, eq), lineno);
    std::string key = klex.ident();
    if (!klex.eof())
      throw ConfigError("line " + std::to_string(lineno) + ": malformed key");
    if (raw.entries.count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    Lexer vlex(std::string_view(line).substr(eq + 1), lineno);
    Value v = parse_value(vlex);
    if (!vlex.eof())
      throw ConfigError("line " + std::to_string(lineno) + ": trailing characters after value");
    raw.entries.emplace(std::move(key), std::make_pair(std::move(v), lineno));
  }
  return raw;
}

inline double want_number(const Value& v, const std::string& key) {
  if (auto* d = std::get_if<double>(&v.v)) return *d;
  throw ConfigError("key '" + key + "': expected a number");
}

inline std::vector<double> want_list(const Value& v, const std::string& key) {
  if (auto* l = std::get_if<std::vector<double>>(&v.v)) return *l;
  throw ConfigError("key '" + key + "': expected a list of numbers");
}

inline Mat to_matrix(const std::vector<double>& flat, int rows, int cols,
                     const std::string& key) {
  if (static_cast<int>(flat.size()) != rows * cols)
    throw ConfigError("key '" + key + "': expected " + std::to_string(rows * cols) +
                      " entries (row-major), got " + std::to_string(flat.size()));
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
  return m;
}

inline Vec to_vector(const std::vector<double>& flat) {
  Vec v(static_cast<int>(flat.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = flat[static_cast<std::size_t>(i)];
  return v;
}

inline const Ctor& want_ctor(const Value& v, const std::string& key) {
  if (auto* c = std::get_if<std::shared_ptr<Ctor>>(&v.v)) return **c;
  throw ConfigError("key '" + key + "': expected a constructor like power(alpha=4, theta=1)");
}

inline std::map<std::string, Value> ctor_args(const Ctor& c, const std::string& key,
                                              const std::set<std::string>& allowed) {
  std::map<std::string, Value> out;
  for (const auto& [k, v] : c.args) {
    if (!allowed.count(k))
      throw ConfigError("key '" + key + "': unknown argument '" + k + "' for " + c.name);
    if (out.count(k)) throw ConfigError("key '" + key + "': duplicate argument '" + k + "'");
    out.emplace(k, v);
  }
  return out;
}

inline FunctionSpec parse_function(const Value& v, const std::string& key) {
  const Ctor& c = want_ctor(v, key);
  if (c.name == "quadratic") {
    auto args = ctor_args(c, key, {"dim", "q", "b"});
    if (!args.count("dim") || !args.count("q") || !args.count("b"))
      throw ConfigError("key '" + key + "': quadratic requires dim, q, b");
    const int dim = static_cast<int>(want_number(args.at("dim"), key));
    Mat q = to_matrix(want_list(args.at("q"), key), dim, dim, key);
    Vec b = to_vector(want_list(args.at("b"), key));
    if (b.size() != dim) throw ConfigError("key '" + key + "': b must have dim entries");
    return FunctionSpec::quadratic(std::move(q), std::move(b));
  }
  if (c.name == "least_squares") {
    auto args = ctor_args(c, key, {"rows", "cols", "a", "b"});
    if (!args.count("rows") || !args.count("cols") || !args.count("a") || !args.count("b"))
      throw ConfigError("key '" + key + "': least_squares requires rows, cols, a, b");
    const int rows = static_cast<int>(want_number(args.at("rows"), key));
    const int cols = static_cast<int>(want_number(args.at("cols"), key));
    Mat a = to_matrix(want_list(args.at("a"), key), rows, cols, key);
    Vec b = to_vector(want_list(args.at("b"), key));
    if (b.size() != rows) throw ConfigError("key '" + key + "': b must have rows entries");
    return FunctionSpec::least_squares(std::move(a), std::move(b));
  }
  if (c.name == "logsumexp_softplus") {
    auto args = ctor_args(c, key, {"dim"});
    if (!args.count("dim")) throw ConfigError("key '" + key + "': logsumexp_softplus requires dim");
    return FunctionSpec::logsumexp_softplus(static_cast<int>(want_number(args.at("dim"), key)));
  }
  if (c.name == "shifted_sqnorm") {
    auto args = ctor_args(c, key, {"c"});
    if (!args.count("c")) throw ConfigError("key '" + key + "': shifted_sqnorm requires c");
    return FunctionSpec::shifted_sqnorm(to_vector(want_list(args.at("c"), key)));
  }
  throw ConfigError("key '" + key + "': unknown function family '" + c.name + "'");
}

}  // namespace cfg_detail

inline ExperimentConfig parse_config(const std::string& text) {
  using cfg_detail::want_list;
  using cfg_detail::want_number;
  auto raw = cfg_detail::tokenize(text);

  static const std::set<std::string> known = {
      "phi",     "u",       "gamma",   "epsilon", "theta",    "t0",
      "x0",      "v0",      "t_end",   "abs_tol", "rel_tol",  "samples_per_decade",
      "max_steps", "checks", "tikhonov_grid", "rate_window_decades", "tikhonov_dist_tol"};
  std::string unknown;
  for (const auto& [key, entry] : raw.entries)
    if (!known.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError("unknown keys: " + unknown);

  auto get = [&](const std::string& key) -> const cfg_detail::Value* {
    auto it = raw.entries.find(key);
    return it == raw.entries.end() ? nullptr : &it->second.first;
  };
  auto require = [&](const std::string& key) -> const cfg_detail::Value& {
    auto* v = get(key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    return *v;
  };

  ExperimentConfig cfg;

  cfg.theta = want_number(require("theta"), "theta");
  if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) throw ConfigError("theta must lie in [0,1]");
  cfg.t_end = want_number(require("t_end"), "t_end");
  if (auto* v = get("t0")) cfg.t0 = want_number(*v, "t0");
  if (!(cfg.t_end > cfg.t0)) throw ConfigError("t_end must exceed t0");

  cfg.problem.phi = cfg_detail::parse_function(require("phi"), "phi");
  if (auto* v = get("u"))
    cfg.problem.u = cfg_detail::parse_function(*v, "u");
  else
    cfg.problem.u = FunctionSpec::shifted_sqnorm(Vec::Zero(cfg.problem.phi.dim));
  if (cfg.problem.u.dim != cfg.problem.phi.dim)
    throw ConfigError("phi and u dimensions differ");

  {
    const auto& c = cfg_detail::want_ctor(require("gamma"), "gamma");
    try {
      if (c.name == "power") {
        auto args = cfg_detail::ctor_args(c, "gamma", {"alpha", "theta"});
        if (!args.count("alpha") || !args.count("theta"))
          throw ConfigError("gamma power requires alpha and theta");
        cfg.gamma = DampingSchedule::power(want_number(args.at("alpha"), "gamma"),
                                           want_number(args.at("theta"), "gamma"), cfg.t0);
      } else if (c.name == "constant") {
        auto args = cfg_detail::ctor_args(c, "gamma", {"g0"});
        if (!args.count("g0")) throw ConfigError("gamma constant requires g0");
        cfg.gamma = DampingSchedule::constant(want_number(args.at("g0"), "gamma"), cfg.t0);
      } else if (c.name == "perturbed_power") {
        auto args = cfg_detail::ctor_args(c, "gamma", {"alpha", "theta", "delta", "q"});
        if (!args.count("alpha") || !args.count("theta") || !args.count("delta") ||
            !args.count("q"))
          throw ConfigError("gamma perturbed_power requires alpha, theta, delta, q");
        cfg.gamma = DampingSchedule::perturbed_power(
            want_number(args.at("alpha"), "gamma"), want_number(args.at("theta"), "gamma"),
            want_number(args.at("delta"), "gamma"), want_number(args.at("q"), "gamma"), cfg.t0);
      } else {
        throw ConfigError("unknown gamma form '" + c.name + "'");
      }
    } catch (const InvalidSpec& ex) {
      throw ConfigError(std::string("gamma: ") + ex.what());
    }
  }

  {
    const auto& value = require("epsilon");
    if (auto* id = std::get_if<std::string>(&value.v)) {
      if (*id != "zero") throw ConfigError("unknown epsilon form '" + *id + "'");
      cfg.epsilon = TikhonovSchedule::zero(cfg.t0);
    } else {
      const auto& c = cfg_detail::want_ctor(value, "epsilon");
      try {
        if (c.name == "power") {
          auto args = cfg_detail::ctor_args(c, "epsilon", {"c", "p"});
          if (!args.count("c") || !args.count("p"))
            throw ConfigError("epsilon power requires c and p");
          cfg.epsilon = TikhonovSchedule::power(want_number(args.at("c"), "epsilon"),
                                                want_number(args.at("p"), "epsilon"), cfg.t0);
        } else if (c.name == "zero") {
          cfg.epsilon = TikhonovSchedule::zero(cfg.t0);
        } else {
          throw ConfigError("unknown epsilon form '" + c.name + "'");
        }
      } catch (const InvalidSpec& ex) {
        throw ConfigError(std::string("epsilon: ") + ex.what());
      }
    }
  }

  const int dim = cfg.problem.phi.dim;
  cfg.x0 = Vec::Ones(dim);
  cfg.v0 = Vec::Zero(dim);
  if (auto* v = get("x0")) {
    cfg.x0 = cfg_detail::to_vector(want_list(*v, "x0"));
    if (cfg.x0.size() != dim) throw ConfigError("x0 dimension does not match the problem");
  }
  if (auto* v = get("v0")) {
    cfg.v0 = cfg_detail::to_vector(want_list(*v, "v0"));
    if (cfg.v0.size() != dim) throw ConfigError("v0 dimension does not match the problem");
  }

  if (auto* v = get("abs_tol")) cfg.abs_tol = want_number(*v, "abs_tol");
  if (auto* v = get("rel_tol")) cfg.rel_tol = want_number(*v, "rel_tol");
  if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0))
    throw ConfigError("tolerances must be positive");
  if (auto* v = get("samples_per_decade"))
    cfg.samples_per_decade = static_cast<int>(want_number(*v, "samples_per_decade"));
  if (cfg.samples_per_decade < 1) throw ConfigError("samples_per_decade must be >= 1");
  if (auto* v = get("max_steps")) cfg.max_steps = static_cast<long>(want_number(*v, "max_steps"));
  if (cfg.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (auto* v = get("rate_window_decades")) {
    cfg.rate_window_decades = want_number(*v, "rate_window_decades");
    if (!(cfg.rate_window_decades > 0.0))
      throw ConfigError("rate_window_decades must be positive");
  }
  if (auto* v = get("tikhonov_dist_tol")) {
    cfg.tikhonov_dist_tol = want_number(*v, "tikhonov_dist_tol");
    if (!(cfg.tikhonov_dist_tol > 0.0)) throw ConfigError("tikhonov_dist_tol must be positive");
  }
  if (auto* v = get("tikhonov_grid")) {
    cfg.tikhonov_grid = want_list(*v, "tikhonov_grid");
    if (cfg.tikhonov_grid.empty()) throw ConfigError("tikhonov_grid must not be empty");
  }
  if (auto* v = get("checks")) {
    const auto* ids = std::get_if<std::vector<std::string>>(&v->v);
    if (!ids) {
      if (auto* nums = std::get_if<std::vector<double>>(&v->v); nums && nums->empty())
        ids = nullptr;  // an empty list parses as numeric; treat as no checks
      else
        throw ConfigError("checks must be a list of check names");
    }
    cfg.checks.clear();
    if (ids) {
      for (const auto& id : *ids) {
        bool found = false;
        for (const auto& [check, name] : check_names())
          if (name == id) {
            cfg.checks.insert(check);
            found = true;
          }
        if (!found) throw ConfigError("unknown check '" + id + "'");
      }
    }
  }

  if (!alpha_gate_holds(cfg.theta, derived_alpha(cfg.gamma)))
    cfg.warnings.push_back(cfg.theta == 1.0
                               ? "alpha_gate requires alpha > 3 when theta = 1"
                               : "alpha_gate requires alpha > 0");
  else if (cfg.theta == 1.0 && derived_alpha(cfg.gamma) <= 3.1)
    cfg.warnings.push_back("alpha is close to the critical value 3");
  return cfg;
}

namespace cfg_detail {

inline std::string render_list(const Vec& v) {
  std::string out = "[";
  for (int i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt_g17(v[i]);
  return out + "]";
}

inline std::string render_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt_g17(v[i]);
  return out + "]";
}

inline std::string render_matrix(const Mat& m) {
  std::string out = "[";
  bool first = true;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      out += (first ? "" : ", ") + fmt_g17(m(r, c));
      first = false;
    }
  return out + "]";
}

inline std::string render_function(const FunctionSpec& f) {
  using Family = FunctionSpec::Family;
  switch (f.family) {
    case Family::quadratic:
      return "quadratic(dim=" + std::to_string(f.dim) + ", q=" + render_matrix(f.matrix) +
             ", b=" + render_list(f.vector) + ")";
    case Family::least_squares:
      return "least_squares(rows=" + std::to_string(f.rows) +
             ", cols=" + std::to_string(f.dim) + ", a=" + render_matrix(f.matrix) +
             ", b=" + render_list(f.vector) + ")";
    case Family::logsumexp_softplus:
      return "logsumexp_softplus(dim=" + std::to_string(f.dim) + ")";
    case Family::shifted_sqnorm:
      return "shifted_sqnorm(c=" + render_list(f.vector) + ")";
  }
  return {};
}

}  // namespace cfg_detail

/// Canonical text form; parse_config(render_config(cfg)) reproduces cfg.
inline std::string render_config(const ExperimentConfig& cfg) {
  std::string out;
  out += "phi = " + cfg_detail::render_function(cfg.problem.phi) + "\n";
  out += "u = " + cfg_detail::render_function(cfg.problem.u) + "\n";
  switch (cfg.gamma.form) {
    case DampingSchedule::Form::power:
      out += "gamma = power(alpha=" + fmt_g17(cfg.gamma.alpha) +
             ", theta=" + fmt_g17(cfg.gamma.theta) + ")\n";
      break;
    case DampingSchedule::Form::constant:
      out += "gamma = constant(g0=" + fmt_g17(cfg.gamma.g0) + ")\n";
      break;
    case DampingSchedule::Form::perturbed_power:
      out += "gamma = perturbed_power(alpha=" + fmt_g17(cfg.gamma.alpha) +
             ", theta=" + fmt_g17(cfg.gamma.theta) + ", delta=" + fmt_g17(cfg.gamma.delta) +
             ", q=" + fmt_g17(cfg.gamma.q) + ")\n";
      break;
  }
  if (cfg.epsilon.is_zero())
    out += "epsilon = zero\n";
  else
    out += "epsilon = power(c=" + fmt_g17(cfg.epsilon.c) + ", p=" + fmt_g17(cfg.epsilon.p) + ")\n";
  out += "theta = " + fmt_g17(cfg.theta) + "\n";
  out += "t0 = " + fmt_g17(cfg.t0) + "\n";
  out += "x0 = " + cfg_detail::render_list(cfg.x0) + "\n";
  out += "v0 = " + cfg_detail::render_list(cfg.v0) + "\n";
  out += "t_end = " + fmt_g17(cfg.t_end) + "\n";
  out += "abs_tol = " + fmt_g17(cfg.abs_tol) + "\n";
  out += "rel_tol = " + fmt_g17(cfg.rel_tol) + "\n";
  out += "samples_per_decade = " + std::to_string(cfg.samples_per_decade) + "\n";
  out += "max_steps = " + std::to_string(cfg.max_steps) + "\n";
  out += "rate_window_decades = " + fmt_g17(cfg.rate_window_decades) + "\n";
  out += "tikhonov_dist_tol = " + fmt_g17(cfg.tikhonov_dist_tol) + "\n";
  out += "tikhonov_grid = " + cfg_detail::render_list(cfg.tikhonov_grid) + "\n";
  out += "checks = [";
  bool first = true;
  for (const auto& [check, name] : check_names())
    if (cfg.checks.count(check)) {
      out += (first ? "" : ", ") + name;
      first = false;
    }
  out += "]\n";
  return out;
}

}  // namespace tikdyn

#endif
