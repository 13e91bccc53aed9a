#include "hlx_app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include <hlx/errors.hpp>

namespace hlx::app {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path, "missing");
  return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return as_number(obj.at(key), path);
}

// A scalar or an array of one or two numbers.
std::vector<double> as_vector(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty() || v.size() > 2) {
    throw ConfigError(path, "expected a number or an array of 1 or 2 numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Point as_point(const json& v, const std::string& path, int dim) {
  const auto xs = as_vector(v, path);
  if (static_cast<int>(xs.size()) != dim) {
    throw ConfigError(path, "expected " + std::to_string(dim) + " component(s)");
  }
  return {xs[0], dim == 2 ? xs[1] : 0.0};
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

CostFunction parse_cost(const json& j) {
  const std::string kind = as_string(require(j, "kind", "cost.kind"), "cost.kind");
  try {
    if (kind == "quadratic") return CostFunction::quadratic(number_or(j, "kappa", "cost.kappa", 0.5));
    if (kind == "power") {
      return CostFunction::power(as_number(require(j, "exponent", "cost.exponent"), "cost.exponent"),
                                 number_or(j, "kappa", "cost.kappa", 1.0));
    }
    if (kind == "ball") {
      return CostFunction::ball_indicator(as_number(require(j, "radius", "cost.radius"), "cost.radius"));
    }
    if (kind == "dirac") return CostFunction::dirac_indicator();
  } catch (const InvalidArgument& e) {
    throw ConfigError("cost", e.what());
  }
  throw ConfigError("cost.kind", "unknown kind '" + kind + "' (quadratic, power, ball, dirac)");
}

KernelModel parse_kernel(const json& j, int dim, const std::string& path) {
  const std::string kind = as_string(require(j, "kind", path + ".kind"), path + ".kind");
  const Point zero{0.0, 0.0};
  try {
    KernelModel model = KernelModel::dirac(dim);
    if (kind == "dirac") {
      model = KernelModel::dirac(dim, j.contains("shift") ? as_point(j["shift"], path + ".shift", dim) : zero);
    } else if (kind == "gaussian") {
      const Point drift = j.contains("drift") ? as_point(j["drift"], path + ".drift", dim) : zero;
      const Point sigma2 = as_point(require(j, "sigma2", path + ".sigma2"), path + ".sigma2", dim);
      model = KernelModel::gaussian(dim, drift, sigma2);
    } else if (kind == "compound_poisson") {
      const double rate = as_number(require(j, "rate", path + ".rate"), path + ".rate");
      const json& js = require(j, "jumps", path + ".jumps");
      if (!js.is_array() || js.empty()) throw ConfigError(path + ".jumps", "expected a non-empty array");
      std::vector<Jump> jumps;
      for (std::size_t i = 0; i < js.size(); ++i) {
        const std::string p = path + ".jumps[" + std::to_string(i) + "]";
        jumps.push_back({as_point(require(js[i], "displacement", p + ".displacement"), p + ".displacement", dim),
                         as_number(require(js[i], "probability", p + ".probability"), p + ".probability")});
      }
      model = KernelModel::compound_poisson(dim, rate, std::move(jumps));
    } else if (kind == "sum") {
      const json& ps = require(j, "parts", path + ".parts");
      if (!ps.is_array() || ps.empty()) throw ConfigError(path + ".parts", "expected a non-empty array");
      std::vector<KernelModel> parts;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        parts.push_back(parse_kernel(ps[i], dim, path + ".parts[" + std::to_string(i) + "]"));
      }
      model = KernelModel::sum(parts);
    } else {
      throw ConfigError(path + ".kind",
                        "unknown kind '" + kind + "' (dirac, gaussian, compound_poisson, sum)");
    }
    if (j.contains("tail_mass_tol")) {
      model = model.with_tail_mass_tol(as_number(j["tail_mass_tol"], path + ".tail_mass_tol"));
    }
    return model;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
}

Numerics parse_numerics(const json& j) {
  Numerics n;
  if (!j.is_object()) throw ConfigError("numerics", "expected an object");
  n.tol_constant = number_or(j, "tol_constant", "numerics.tol_constant", n.tol_constant);
  if (!(n.tol_constant >= 0.0)) throw ConfigError("numerics.tol_constant", "must be >= 0");
  auto count = [&](const char* key, std::size_t fallback) {
    const double v = number_or(j, key, std::string("numerics.") + key, static_cast<double>(fallback));
    if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(std::string("numerics.") + key, "must be a non-negative integer");
    return static_cast<std::size_t>(v);
  };
  n.mc_paths = count("mc_paths", n.mc_paths);
  if (n.mc_paths != 0 && n.mc_paths < 1000) throw ConfigError("numerics.mc_paths", "must be 0 or >= 1000");
  n.mc_points = static_cast<int>(count("mc_points", static_cast<std::size_t>(n.mc_points)));
  n.ot_points = static_cast<int>(count("ot_points", static_cast<std::size_t>(n.ot_points)));
  n.ot_map_budget = count("ot_map_budget", n.ot_map_budget);
  n.ot_transport_budget = count("ot_transport_budget", n.ot_transport_budget);
  if (j.contains("fast_path")) {
    if (!j["fast_path"].is_boolean()) throw ConfigError("numerics.fast_path", "expected a boolean");
    n.fast_path = j["fast_path"].get<bool>();
  }
  if (j.contains("convolution")) {
    const auto c = as_string(j["convolution"], "numerics.convolution");
    if (c == "auto") n.convolution = ConvolutionPath::Auto;
    else if (c == "direct") n.convolution = ConvolutionPath::Direct;
    else if (c == "spectral") n.convolution = ConvolutionPath::Spectral;
    else throw ConfigError("numerics.convolution", "expected auto, direct or spectral");
  }
  return n;
}

}  // namespace

SchemeConfig RunConfig::scheme(int n, Order o) const {
  SchemeConfig s;
  s.t = t;
  s.n = n;
  s.order = o;
  s.cost = cost;
  s.kernel = kernel;
  s.tol_constant = numerics.tol_constant;
  s.use_fast_path = numerics.fast_path;
  s.convolution = numerics.convolution;
  return s;
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");

  RunConfig cfg;
  const json& datum = require(j, "datum", "datum");
  cfg.datum = as_string(require(datum, "name", "datum.name"), "datum.name");
  if (cfg.datum == "csv") {
    cfg.datum_path = as_string(require(datum, "path", "datum.path"), "datum.path");
    if (cfg.datum_path.is_relative() && !base_dir.empty()) cfg.datum_path = base_dir / cfg.datum_path;
  } else {
    const auto& names = datum_catalog();
    if (std::find(names.begin(), names.end(), cfg.datum) == names.end()) {
      throw ConfigError("datum.name", "unknown datum '" + cfg.datum + "'");
    }
  }

  int dim = 1;
  if (j.contains("domain")) {
    const json& d = j["domain"];
    const auto lo = as_vector(require(d, "lower", "domain.lower"), "domain.lower");
    const auto hi = as_vector(require(d, "upper", "domain.upper"), "domain.upper");
    const double h = as_number(require(d, "h", "domain.h"), "domain.h");
    if (lo.size() != hi.size()) throw ConfigError("domain.upper", "dimension differs from domain.lower");
    if (!(h > 0.0)) throw ConfigError("domain.h", "must be > 0");
    try {
      cfg.domain = GridDomain::from_spacing(lo, hi, h);
    } catch (const InvalidArgument& e) {
      throw ConfigError("domain", e.what());
    }
    dim = cfg.domain->dim();
  } else if (cfg.datum != "csv") {
    throw ConfigError("domain", "missing");
  } else {
    cfg.domain = build_datum(cfg).domain();
    dim = cfg.domain->dim();
  }

  cfg.cost = parse_cost(require(j, "cost", "cost"));
  cfg.kernel = parse_kernel(require(j, "kernel", "kernel"), dim, "kernel");

  cfg.t = as_number(require(j, "t", "t"), "t");
  if (!(cfg.t > 0.0)) throw ConfigError("t", "must be > 0");

  const json& ns = require(j, "n", "n");
  if (ns.is_number_integer()) {
    cfg.n_list = {ns.get<int>()};
  } else if (ns.is_array() && !ns.empty()) {
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (!ns[i].is_number_integer()) throw ConfigError("n[" + std::to_string(i) + "]", "expected an integer");
      cfg.n_list.push_back(ns[i].get<int>());
    }
  } else {
    throw ConfigError("n", "expected a non-empty list of integers");
  }
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    if (cfg.n_list[i] < 1) throw ConfigError("n", "entries must be >= 1");
    if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1]) throw ConfigError("n", "must be strictly increasing");
  }

  if (j.contains("order")) {
    const auto o = as_string(j["order"], "order");
    if (o == "I") cfg.order = OrderChoice::I;
    else if (o == "J") cfg.order = OrderChoice::J;
    else if (o == "both") cfg.order = OrderChoice::Both;
    else throw ConfigError("order", "expected I, J or both");
  }
  if (j.contains("eps") && !j["eps"].is_null()) {
    cfg.eps = as_number(j["eps"], "eps");
    if (!(*cfg.eps > 0.0)) throw ConfigError("eps", "must be > 0");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) {
    cfg.output = as_string(j["output"], "output");
    if (cfg.output.is_relative() && !base_dir.empty()) cfg.output = base_dir / cfg.output;
  }
  if (j.contains("numerics")) cfg.numerics = parse_numerics(j["numerics"]);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

const std::vector<std::string>& datum_catalog() {
  static const std::vector<std::string> names{"cos", "ramp-clamp", "bump", "constant"};
  return names;
}

ScalarField catalog_formula(const std::string& name, int dim) {
  if (name == "cos") {
    if (dim == 1) return [](const Point& x) { return std::cos(x[0]); };
    return [](const Point& x) { return std::cos(x[0]) * std::cos(x[1]); };
  }
  if (name == "ramp-clamp") {
    return [](const Point& x) { return std::clamp(x[0], -1.0, 1.0); };
  }
  if (name == "bump") {
    return [](const Point& x) { return std::max(0.0, 1.0 - x[0] * x[0] - x[1] * x[1]); };
  }
  if (name == "constant") {
    return [](const Point&) { return 1.0; };
  }
  throw ConfigError("datum.name", "unknown datum '" + name + "'");
}

GridFunction build_datum(const RunConfig& cfg) {
  if (cfg.datum == "csv") {
    std::ifstream in(cfg.datum_path);
    if (!in) throw ConfigError("datum.path", "cannot open " + cfg.datum_path.string());
    try {
      GridFunction f = read_csv(in);
      if (cfg.domain && !(f.domain() == *cfg.domain)) {
        throw ConfigError("datum.path", "grid in the CSV differs from the domain block");
      }
      return f;
    } catch (const InvalidArgument& e) {
      throw ConfigError("datum.path", e.what());
    }
  }
  return GridFunction::sample(*cfg.domain, catalog_formula(cfg.datum, cfg.domain->dim()));
}

}  // namespace hlx::app
