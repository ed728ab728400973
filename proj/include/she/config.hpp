#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "she/errors.hpp"
#include "she/levy.hpp"
#include "she/solver.hpp"

namespace she {

// Experiment configuration parsed from [section] / key = value text.
// Parsing either succeeds completely or fails with a line-anchored error;
// unknown sections and keys are rejected.
struct ExperimentConfig {
  std::string kind = "simulate";

  // [levy]
  std::string levy_kind = "pareto_tail";
  double levy_alpha = 1.0;
  std::vector<DiracAtom> levy_atoms;
  std::vector<DensityKnot> levy_knots;

  // [field]
  int d = 1;
  double t = 1.0;
  std::string mode = "additive";
  double window_lo = -6.0;
  double window_hi = 6.0;
  double margin_tolerance = 1e-6;
  double small_jump_cutoff = 1.0;
  int picard_levels = 0;
  double picard_cone = 1.0;
  int chain_cap = 0;

  // [sampling]
  std::uint64_t replications = 10000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  // [analysis]
  double R_min = 2.0;
  double R_max = 1e4;
  int R_points = 40;
  std::string fit_form = "A";
  double alpha = 1.0;   // tail index used by fits and thresholds
  double gamma = 0.5;
  double M = 0.0;
  int N = 1;
  double theta = 0.3;
  int n_max = 12;
  int lattice_radius_exp = 8;  // lattice points out to e^{this}
  int scan_N_lo = 1;
  int scan_N_hi = 6;
  double scan_R = 100.0;

  // [output]
  std::string out_dir = "out";

  LevyMeasure measure() const {
    if (levy_kind == "pareto_tail") return LevyMeasure::pareto_tail(levy_alpha);
    if (levy_kind == "dirac_mixture") return LevyMeasure::dirac_mixture(levy_atoms);
    if (levy_kind == "piecewise_density")
      return LevyMeasure::piecewise_density(levy_knots);
    throw config_error("unknown levy kind: " + levy_kind);
  }

  FieldConfig field_config() const {
    FieldConfig fc;
    fc.d = d;
    fc.t = t;
    fc.measure = measure();
    if (mode == "additive") fc.mode = Mode::additive;
    else if (mode == "multiplicative") fc.mode = Mode::multiplicative;
    else throw config_error("unknown mode: " + mode);
    fc.window.lo.assign(static_cast<std::size_t>(d), window_lo);
    fc.window.hi.assign(static_cast<std::size_t>(d), window_hi);
    fc.margin_tolerance = margin_tolerance;
    fc.small_jump_cutoff = small_jump_cutoff;
    fc.picard_levels = picard_levels;
    fc.picard_cone = picard_cone;
    fc.chain_cap = chain_cap;
    fc.seed = seed;
    return fc;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, int line) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (...) {
    throw config_error("not a number: '" + v + "'", line);
  }
  if (pos != v.size()) throw config_error("trailing characters in number: '" + v + "'", line);
  return x;
}

inline std::int64_t parse_int(const std::string& v, int line) {
  std::size_t pos = 0;
  std::int64_t x;
  try {
    x = std::stoll(v, &pos);
  } catch (...) {
    throw config_error("not an integer: '" + v + "'", line);
  }
  if (pos != v.size()) throw config_error("trailing characters in integer: '" + v + "'", line);
  return x;
}

// "a:b,c:d" pair lists for atoms and knots
inline std::vector<std::pair<double, double>> parse_pairs(const std::string& v,
                                                          int line) {
  std::vector<std::pair<double, double>> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw config_error("expected 'a:b' pair, got '" + item + "'", line);
    out.emplace_back(parse_double(trim(item.substr(0, colon)), line),
                     parse_double(trim(item.substr(colon + 1)), line));
  }
  if (out.empty()) throw config_error("empty pair list", line);
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"experiment", {"kind"}},
      {"levy", {"kind", "alpha", "atoms", "knots"}},
      {"field",
       {"d", "t", "mode", "window_lo", "window_hi", "margin_tolerance",
        "small_jump_cutoff", "picard_levels", "picard_cone", "chain_cap"}},
      {"sampling", {"replications", "seed", "threads"}},
      {"analysis",
       {"R_min", "R_max", "R_points", "fit_form", "alpha", "gamma", "M", "N",
        "theta", "n_max", "lattice_radius_exp", "scan_N_lo", "scan_N_hi",
        "scan_R"}},
      {"output", {"dir"}},
  };
  ExperimentConfig cfg;
  std::istringstream ss(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw config_error("unterminated section header", line);
      section = detail::trim(s.substr(1, s.size() - 2));
      if (schema.find(section) == schema.end())
        throw config_error("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw config_error("expected key = value", line);
    if (section.empty()) throw config_error("key outside any [section]", line);
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (schema.at(section).find(key) == schema.at(section).end())
      throw config_error("unknown key '" + key + "' in [" + section + "]", line);
    if (val.empty()) throw config_error("empty value for '" + key + "'", line);

    if (section == "experiment") {
      cfg.kind = val;
    } else if (section == "levy") {
      if (key == "kind") cfg.levy_kind = val;
      else if (key == "alpha") cfg.levy_alpha = detail::parse_double(val, line);
      else if (key == "atoms") {
        for (auto [z, w] : detail::parse_pairs(val, line))
          cfg.levy_atoms.push_back({z, w});
      } else {
        for (auto [z, f] : detail::parse_pairs(val, line))
          cfg.levy_knots.push_back({z, f});
      }
    } else if (section == "field") {
      if (key == "d") cfg.d = static_cast<int>(detail::parse_int(val, line));
      else if (key == "t") cfg.t = detail::parse_double(val, line);
      else if (key == "mode") cfg.mode = val;
      else if (key == "window_lo") cfg.window_lo = detail::parse_double(val, line);
      else if (key == "window_hi") cfg.window_hi = detail::parse_double(val, line);
      else if (key == "margin_tolerance")
        cfg.margin_tolerance = detail::parse_double(val, line);
      else if (key == "small_jump_cutoff")
        cfg.small_jump_cutoff = detail::parse_double(val, line);
      else if (key == "picard_levels")
        cfg.picard_levels = static_cast<int>(detail::parse_int(val, line));
      else if (key == "picard_cone") cfg.picard_cone = detail::parse_double(val, line);
      else cfg.chain_cap = static_cast<int>(detail::parse_int(val, line));
    } else if (section == "sampling") {
      if (key == "replications")
        cfg.replications = static_cast<std::uint64_t>(detail::parse_int(val, line));
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(detail::parse_int(val, line));
      else cfg.threads = static_cast<int>(detail::parse_int(val, line));
    } else if (section == "analysis") {
      if (key == "R_min") cfg.R_min = detail::parse_double(val, line);
      else if (key == "R_max") cfg.R_max = detail::parse_double(val, line);
      else if (key == "R_points")
        cfg.R_points = static_cast<int>(detail::parse_int(val, line));
      else if (key == "fit_form") cfg.fit_form = val;
      else if (key == "alpha") cfg.alpha = detail::parse_double(val, line);
      else if (key == "gamma") cfg.gamma = detail::parse_double(val, line);
      else if (key == "M") cfg.M = detail::parse_double(val, line);
      else if (key == "N") cfg.N = static_cast<int>(detail::parse_int(val, line));
      else if (key == "theta") cfg.theta = detail::parse_double(val, line);
      else if (key == "n_max") cfg.n_max = static_cast<int>(detail::parse_int(val, line));
      else if (key == "lattice_radius_exp")
        cfg.lattice_radius_exp = static_cast<int>(detail::parse_int(val, line));
      else if (key == "scan_N_lo")
        cfg.scan_N_lo = static_cast<int>(detail::parse_int(val, line));
      else if (key == "scan_N_hi")
        cfg.scan_N_hi = static_cast<int>(detail::parse_int(val, line));
      else cfg.scan_R = detail::parse_double(val, line);
    } else {  // output
      cfg.out_dir = val;
    }
  }
  static const std::set<std::string> kinds = {
      "simulate", "tail",     "dimension",
      "chains",   "verify",   "classify",
      "bounded-domain-compare"};
  if (kinds.find(cfg.kind) == kinds.end())
    throw config_error("unknown experiment kind: " + cfg.kind);
  return cfg;
}

}  // namespace she
