#pragma once

// Study configuration: flat `key = value` files and flag values share one
// parser, so every setting is validated the same way.
//
// Config file format: one `key = value` per line, `#` starts a comment,
// blank lines ignored, '-' and '_' interchangeable in keys. Keys:
//   example            1 | 2 | 3
//   approach           dto | otd | both
//   degree             k (1 or 2); control-degree m, adjoint-degree l
//   levels, coarsest   number of halved levels and the coarsest h
//   h                  single level (profile)
//   tau                paper | general[:T1:T2] | coth | zero
//   format             csv | markdown
//   out                output path (stdout if empty)
//   epsilon, omega     override the example's diffusion / control cost
//   example2-profile   steep | literal
//   error-rule         composite | element
//   error-degree, error-subdivisions
//   ci                 true | false (2D studies keep only h >= 1.25e-2)
//   dump-system        true | false; dump-dir
//   threshold          oscillation threshold relative to max|u_h|

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "supgoc/analysis.hpp"

namespace supgoc {

/// Raised for malformed or inconsistent configuration (exit code 2).
class ConfigError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

struct StudyConfig {
  int example = 0;
  std::string approach = "dto";
  int degree = 1;
  std::optional<int> control_degree;
  std::optional<int> adjoint_degree;
  std::optional<int> levels;
  std::optional<double> coarsest;
  std::optional<double> h;
  StabilizationConfig stab;
  std::string format = "csv";
  std::string out;
  std::optional<double> epsilon;
  std::optional<double> omega;
  Example2Profile example2_profile = Example2Profile::SteepLayer;
  std::string error_rule = "composite";
  std::optional<int> error_degree;
  std::optional<int> error_subdivisions;
  bool ci = false;
  bool dump_system = false;
  std::string dump_dir = ".";
  double threshold = 1e-3;

  int dim() const { return example == 1 ? 1 : 2; }
  Degrees degrees() const {
    return {degree, control_degree.value_or(degree), adjoint_degree.value_or(degree)};
  }
  std::vector<Approach> approaches() const {
    if (approach == "both") return {Approach::DTO, Approach::OTD};
    return {approach == "otd" ? Approach::OTD : Approach::DTO};
  }
};

inline constexpr double kCiMinimumH = 1.25e-2;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: " + key + " expects true/false, got '" + v + "'");
}

inline void require_choice(const std::string& key, const std::string& v, std::initializer_list<const char*> ok) {
  for (const char* c : ok)
    if (v == c) return;
  throw ConfigError("config: invalid value '" + v + "' for " + key);
}

}  // namespace detail

/// `paper`, `general`, `general:T1:T2`, `coth` or `zero`.
inline StabilizationConfig parse_tau(const std::string& spec) {
  StabilizationConfig s;
  if (spec == "paper") {
    s.policy = TauPolicy::PaperExample;
  } else if (spec == "coth") {
    s.policy = TauPolicy::Coth;
  } else if (spec == "zero") {
    s.policy = TauPolicy::Zero;
  } else if (spec.rfind("general", 0) == 0) {
    s.policy = TauPolicy::General;
    if (spec != "general") {
      const auto a = spec.find(':');
      const auto b = spec.find(':', a + 1);
      if (a != 7 || b == std::string::npos) throw ConfigError("config: tau expects general:T1:T2, got '" + spec + "'");
      s.tau1 = detail::parse_double("tau", spec.substr(a + 1, b - a - 1));
      s.tau2 = detail::parse_double("tau", spec.substr(b + 1));
      if (s.tau1 < 0.0 || s.tau2 < 0.0) throw ConfigError("config: tau constants must be non-negative");
    }
  } else {
    throw ConfigError("config: unknown tau policy '" + spec + "'");
  }
  return s;
}

/// Applies one setting; throws ConfigError on unknown keys or bad values.
inline void apply_setting(StudyConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = detail::normalize_key(detail::trim(raw_key));
  const std::string v = detail::trim(raw_value);
  if (key == "example") {
    c.example = detail::parse_int(key, v);
    if (c.example < 1 || c.example > 3) throw ConfigError("config: example must be 1, 2 or 3");
  } else if (key == "approach") {
    detail::require_choice(key, v, {"dto", "otd", "both"});
    c.approach = v;
  } else if (key == "degree") {
    c.degree = detail::parse_int(key, v);
  } else if (key == "control-degree") {
    c.control_degree = detail::parse_int(key, v);
  } else if (key == "adjoint-degree") {
    c.adjoint_degree = detail::parse_int(key, v);
  } else if (key == "levels") {
    c.levels = detail::parse_int(key, v);
  } else if (key == "coarsest") {
    c.coarsest = detail::parse_double(key, v);
  } else if (key == "h") {
    c.h = detail::parse_double(key, v);
  } else if (key == "tau") {
    c.stab = parse_tau(v);
  } else if (key == "format") {
    detail::require_choice(key, v, {"csv", "markdown"});
    c.format = v;
  } else if (key == "out") {
    c.out = v;
  } else if (key == "epsilon") {
    c.epsilon = detail::parse_double(key, v);
  } else if (key == "omega") {
    c.omega = detail::parse_double(key, v);
  } else if (key == "example2-profile") {
    detail::require_choice(key, v, {"steep", "literal"});
    c.example2_profile = v == "steep" ? Example2Profile::SteepLayer : Example2Profile::Literal;
  } else if (key == "error-rule") {
    detail::require_choice(key, v, {"composite", "element"});
    c.error_rule = v;
  } else if (key == "error-degree") {
    c.error_degree = detail::parse_int(key, v);
  } else if (key == "error-subdivisions") {
    c.error_subdivisions = detail::parse_int(key, v);
  } else if (key == "ci") {
    c.ci = detail::parse_bool(key, v);
  } else if (key == "dump-system") {
    c.dump_system = detail::parse_bool(key, v);
  } else if (key == "dump-dir") {
    c.dump_dir = v;
  } else if (key == "threshold") {
    c.threshold = detail::parse_double(key, v);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

inline void load_config_stream(StudyConfig& c, std::istream& in, const std::string& name = "config") {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void load_config_file(StudyConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  load_config_stream(c, in, path);
}

/// Cross-field checks, run before any computation.
inline void validate(const StudyConfig& c) {
  if (c.example == 0) throw ConfigError("config: no example given (use --example or an example key in --config)");
  const auto d = c.degrees();
  for (int k : {d.state, d.control, d.adjoint})
    if (k < 1 || k > 2) throw ConfigError("config: polynomial degrees must be 1 or 2");
  if (c.approach != "otd" && d.adjoint != d.state)
    throw ConfigError("config: discretize-then-optimize requires adjoint degree == state degree");
  if (c.levels && *c.levels < 1) throw ConfigError("config: levels must be >= 1");
  if (c.coarsest && !(*c.coarsest > 0.0)) throw ConfigError("config: coarsest must be positive");
  if (c.h && !(*c.h > 0.0)) throw ConfigError("config: h must be positive");
  if (c.epsilon && !(*c.epsilon > 0.0)) throw ConfigError("config: epsilon must be positive");
  if (c.omega && !(*c.omega > 0.0)) throw ConfigError("config: omega must be positive");
  if (c.stab.policy == TauPolicy::Coth && c.dim() != 1) throw ConfigError("config: tau coth is only defined in 1D");
  if (c.error_degree && (*c.error_degree < 1 || *c.error_degree > kMaxQuadratureDegree))
    throw ConfigError("config: error-degree out of range");
  if (c.error_subdivisions && *c.error_subdivisions < 1) throw ConfigError("config: error-subdivisions must be >= 1");
  if (!(c.threshold >= 0.0)) throw ConfigError("config: threshold must be non-negative");
}

/// Coarsest h of the reference study for each example and degree.
inline double default_coarsest(const StudyConfig& c) {
  if (c.example == 1) return 0.1;
  if (c.example == 3 && c.degree == 1) return 0.1;
  return 0.2;
}

inline int default_levels(const StudyConfig& c) {
  if (c.example == 1) return 8;
  if (c.example == 2 && c.degree == 1) return 6;
  return 5;
}

inline std::vector<double> study_levels(const StudyConfig& c) {
  auto h = halving_levels(c.coarsest.value_or(default_coarsest(c)), c.levels.value_or(default_levels(c)));
  if (c.ci && c.dim() == 2)
    h.erase(std::remove_if(h.begin(), h.end(), [](double x) { return x < kCiMinimumH * (1.0 - 1e-9); }), h.end());
  if (h.empty()) throw ConfigError("config: no levels left after applying --ci");
  return h;
}

template <int Dim>
ErrorQuadrature<Dim> error_quadrature(const StudyConfig& c) {
  auto q = c.error_rule == "element" ? ErrorQuadrature<Dim>::element_rule() : ErrorQuadrature<Dim>{};
  if (c.error_degree) q.degree = *c.error_degree;
  if (c.error_subdivisions) q.subdivisions = *c.error_subdivisions;
  return q;
}

}  // namespace supgoc
