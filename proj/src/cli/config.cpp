#include "qmalab/cli.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace qmalab::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void read_positive(const json& j, const char* key, const std::string& where, double& out) {
  read(j, key, where, out);
  if (!(out > 0.0)) throw ConfigError(where + "." + key + ": must be positive");
}

void read_positive(const json& j, const char* key, const std::string& where, int& out) {
  read(j, key, where, out);
  if (out <= 0) throw ConfigError(where + "." + key + ": must be positive");
}

FamilySpec parse_family(const json& j, const std::string& where) {
  reject_unknown(j, where, {"family", "value", "amplitude", "seed", "terms", "max_mode", "entropy", "height",
                            "background", "width", "entropy_excess", "mode"});
  FamilySpec spec;
  read(j, "family", where, spec.family);
  static const std::set<std::string> families{"zero", "constant", "trig", "spike", "manufactured"};
  if (!families.contains(spec.family)) throw ConfigError(where + ".family: unknown family '" + spec.family + "'");
  read(j, "value", where, spec.value);
  read(j, "amplitude", where, spec.amplitude);
  if (j.contains("seed")) {
    read(j, "seed", where, spec.seed);
    spec.has_seed = true;
  }
  read_positive(j, "terms", where, spec.terms);
  read_positive(j, "max_mode", where, spec.max_mode);
  read(j, "entropy", where, spec.entropy);
  read(j, "height", where, spec.height);
  read(j, "background", where, spec.background);
  read(j, "width", where, spec.width);
  read(j, "entropy_excess", where, spec.entropy_excess);
  read(j, "mode", where, spec.mode);
  if (spec.family == "spike" && !(spec.width > 0.0) && !(spec.entropy_excess > 0.0)) {
    throw ConfigError(where + ": spike needs a positive width or entropy_excess");
  }
  return spec;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  reject_unknown(j, "config", {"model", "equation", "p", "F", "sweep", "tolerances", "grids", "harness", "output"});
  RunConfig cfg;
  cfg.source = text;

  if (!j.contains("model")) throw ConfigError("config: missing 'model'");
  const json& model = j.at("model");
  reject_unknown(model, "model", {"m", "res", "period"});
  read_positive(model, "m", "model", cfg.m);
  read_positive(model, "res", "model", cfg.res);
  read_positive(model, "period", "model", cfg.period);
  if (cfg.m > 2) throw ConfigError("model.m: only m = 1 and m = 2 are supported");
  if (cfg.res % 2 != 0 || cfg.res < 4) throw ConfigError("model.res: must be even and at least 4");

  std::string equation = "n1ma";
  read(j, "equation", "config", equation);
  try {
    cfg.kind = solver::equation_kind_from_string(equation);
  } catch (const InvalidArgument&) {
    throw ConfigError("config.equation: expected 'cma' or 'n1ma'");
  }
  read_positive(j, "p", "config", cfg.p);

  if (j.contains("F")) cfg.F = parse_family(j.at("F"), "F");
  if (j.contains("sweep")) {
    const json& sweep = j.at("sweep");
    if (!sweep.is_array()) throw ConfigError("sweep: expected an array of F specifications");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      cfg.members.push_back(parse_family(sweep[i], "sweep[" + std::to_string(i) + "]"));
    }
  }

  auto& ex = cfg.experiment;
  ex.kind = cfg.kind;
  ex.p = cfg.p;
  if (j.contains("tolerances")) {
    const json& tol = j.at("tolerances");
    reject_unknown(tol, "tolerances", {"torus", "ball"});
    read_positive(tol, "torus", "tolerances", ex.tol);
    read_positive(tol, "ball", "tolerances", ex.dirichlet_tol);
  }
  if (j.contains("grids")) {
    const json& grids = j.at("grids");
    reject_unknown(grids, "grids", {"s_count", "comparison_s_count", "k", "alpha", "beta"});
    read_positive(grids, "s_count", "grids", ex.s_count);
    read_positive(grids, "comparison_s_count", "grids", ex.comparison_s_count);
    read(grids, "k", "grids", ex.k_values);
    read(grids, "alpha", "grids", ex.alpha_grid);
    read(grids, "beta", "grids", ex.beta_grid);
    for (int k : ex.k_values) {
      if (k <= 0) throw ConfigError("grids.k: entries must be positive");
    }
  }
  if (j.contains("harness")) {
    const json& h = j.at("harness");
    reject_unknown(h, "harness",
                   {"ball_half_width", "comparison", "alpha_cap_factor", "beta_cap_factor", "gmres_restart"});
    read_positive(h, "ball_half_width", "harness", ex.ball_half_width);
    read(h, "comparison", "harness", ex.comparison);
    read_positive(h, "alpha_cap_factor", "harness", ex.alpha_cap_factor);
    read_positive(h, "beta_cap_factor", "harness", ex.beta_cap_factor);
    read_positive(h, "gmres_restart", "harness", ex.gmres_restart);
  }
  if (!(cfg.p > 2 * cfg.m)) throw ConfigError("config.p: must exceed the complex dimension");
  read(j, "output", "config", cfg.output);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace qmalab::cli
