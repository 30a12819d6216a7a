#include "ruinlab/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ruinlab/error.hpp"

namespace ruinlab {

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }

  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) throw ConfigError(join(path_, k), "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(join(path_, key), "missing required field");
    return j_.at(key);
  }

  Node object(const char* key) const { return Node(raw(key), join(path_, key)); }

  double number(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path_, key), "must be finite");
    return d;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t count(const char* key) const {
    const json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) throw ConfigError(join(path_, key), "must be nonnegative");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(join(path_, key), "expected a nonnegative integer");
  }
  std::uint64_t count(const char* key, std::uint64_t fallback) const { return has(key) ? count(key) : fallback; }

  std::string string(const char* key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const char* key, const std::string& fallback) const { return has(key) ? string(key) : fallback; }

  std::vector<double> numbers(const char* key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(join(path_, key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  const json& array(const char* key) const {
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) throw ConfigError(join(path_, key), "expected a non-empty array");
    return v;
  }

 private:
  const json& j_;
  std::string path_;
};

template <class F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    // Factory errors carry a generic field name; report the config path instead.
    if (e.field().rfind(path, 0) == 0) throw;
    const std::string msg = e.what();
    const auto pos = msg.find(": ");
    throw ConfigError(path, pos == std::string::npos ? msg : msg.substr(pos + 2));
  }
}

Distribution parse_distribution(const Node& n) {
  const std::string kind = n.string("kind");
  return wrap(n.path(), [&] {
    if (kind == "exponential") {
      n.only({"kind", "rate"});
      return Distribution::exponential(n.number("rate"));
    }
    if (kind == "gamma") {
      n.only({"kind", "shape", "scale"});
      return Distribution::gamma(n.number("shape"), n.number("scale"));
    }
    if (kind == "deterministic") {
      n.only({"kind", "value"});
      return Distribution::deterministic(n.number("value"));
    }
    if (kind == "uniform") {
      n.only({"kind", "lo", "hi"});
      return Distribution::uniform(n.number("lo"), n.number("hi"));
    }
    if (kind == "discrete") {
      n.only({"kind", "atoms"});
      std::vector<dist::Atom> atoms;
      const json& arr = n.array("atoms");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const Node a(arr[i], n.path() + ".atoms[" + std::to_string(i) + "]");
        a.only({"value", "prob"});
        atoms.push_back({a.number("value"), a.number("prob")});
      }
      return Distribution::discrete(std::move(atoms));
    }
    if (kind == "lognormal") {
      n.only({"kind", "mu", "sigma"});
      return Distribution::lognormal(n.number("mu"), n.number("sigma"));
    }
    if (kind == "pareto") {
      n.only({"kind", "index", "scale"});
      return Distribution::pareto(n.number("index"), n.number("scale"));
    }
    throw ConfigError(n.path() + ".kind", "unknown distribution kind '" + kind + "'");
  });
}

ThetaLaw parse_theta(const Node& n) {
  const std::string kind = n.string("kind");
  return wrap(n.path(), [&] {
    if (kind == "point_mass") {
      n.only({"kind", "mu", "half_sigma2"});
      return ThetaLaw::point_mass({n.number("mu"), n.number("half_sigma2")});
    }
    if (kind == "finite") {
      n.only({"kind", "atoms"});
      std::vector<ThetaPoint> pts;
      std::vector<double> probs;
      const json& arr = n.array("atoms");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const Node a(arr[i], n.path() + ".atoms[" + std::to_string(i) + "]");
        a.only({"mu", "half_sigma2", "prob"});
        pts.push_back({a.number("mu"), a.number("half_sigma2")});
        probs.push_back(a.number("prob"));
      }
      return ThetaLaw::finite(std::move(pts), std::move(probs));
    }
    if (kind == "polytope_uniform") {
      n.only({"kind", "vertices"});
      std::vector<ThetaPoint> pts;
      const json& arr = n.array("vertices");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = n.path() + ".vertices[" + std::to_string(i) + "]";
        if (!arr[i].is_array() || arr[i].size() != 2 || !arr[i][0].is_number() || !arr[i][1].is_number())
          throw ConfigError(p, "expected [mu, half_sigma2]");
        pts.push_back({arr[i][0].get<double>(), arr[i][1].get<double>()});
      }
      return ThetaLaw::polytope_uniform(std::move(pts));
    }
    if (kind == "product") {
      n.only({"kind", "mu", "half_sigma2"});
      return ThetaLaw::product(parse_distribution(n.object("mu")), parse_distribution(n.object("half_sigma2")));
    }
    if (kind == "zeta") {
      n.only({"kind", "p"});
      return ThetaLaw::zeta_family(n.number("p"));
    }
    throw ConfigError(n.path() + ".kind", "unknown theta kind '" + kind + "'");
  });
}

RegimeSpec parse_regime(const Node& n) {
  const std::string mode = n.string("mode");
  if (mode == "none") {
    n.only({"mode"});
    return regime::None{};
  }
  if (mode == "constant") {
    n.only({"mode", "theta"});
    return regime::Constant{parse_theta(n.object("theta"))};
  }
  if (mode == "piecewise") {
    n.only({"mode", "node_step", "mu", "sigma"});
    return regime::Piecewise{n.number("node_step"), parse_distribution(n.object("mu")),
                             parse_distribution(n.object("sigma"))};
  }
  throw ConfigError(n.path() + ".mode", "unknown regime mode '" + mode + "'");
}

PremiumSpec parse_premium(const Node& n) {
  const std::string mode = n.string("mode");
  if (mode == "constant") {
    n.only({"mode", "c"});
    return premium::Constant{n.number("c")};
  }
  if (mode == "exponential_decay") {
    n.only({"mode", "c1", "gamma_rate"});
    return premium::ExponentialDecay{n.number("c1"), n.number("gamma_rate")};
  }
  if (mode == "zero") {
    n.only({"mode"});
    return premium::Zero{};
  }
  throw ConfigError(n.path() + ".mode", "unknown premium mode '" + mode + "'");
}

ModelConfig parse_model_node(const Node& n) {
  n.only({"claim", "interarrival", "regime", "premium", "mu_lower", "sigma_upper", "c_bar", "grid_step"});
  ModelConfig m;
  m.claim = parse_distribution(n.object("claim"));
  m.interarrival = parse_distribution(n.object("interarrival"));
  m.regime = parse_regime(n.object("regime"));
  m.premium = parse_premium(n.object("premium"));
  m.mu_lower = n.number("mu_lower");
  m.sigma_upper = n.number("sigma_upper");
  m.c_bar = n.number("c_bar");
  m.grid_step = n.number("grid_step", m.grid_step);
  m.validate();
  return m;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("json", "syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
}

}  // namespace

ModelConfig parse_model(const std::string& json_text) {
  const json j = parse_json(json_text);
  return parse_model_node(Node(j, "model"));
}

ExperimentConfig parse_config(const std::string& text) {
  const json j = parse_json(text);
  const Node root(j, "");
  root.only({"version", "seed", "model", "lundberg", "ruin", "perpetuity", "simulate", "validate", "output"});
  if (root.count("version") != static_cast<std::uint64_t>(kConfigVersion))
    throw ConfigError("version", "unsupported config version (expected " + std::to_string(kConfigVersion) + ")");

  ExperimentConfig cfg;
  cfg.seed = root.count("seed");
  cfg.model = parse_model_node(root.object("model"));

  if (root.has("lundberg")) {
    const Node n = root.object("lundberg");
    n.only({"tol", "method", "mc_samples", "delta"});
    cfg.lundberg.tol = n.number("tol", cfg.lundberg.tol);
    cfg.lundberg.method = n.string("method", cfg.lundberg.method);
    cfg.lundberg.mc_samples = n.count("mc_samples", cfg.lundberg.mc_samples);
    cfg.lundberg.delta = n.number("delta", cfg.lundberg.delta);
    if (!(cfg.lundberg.tol > 0)) throw ConfigError("lundberg.tol", "must be positive");
    if (cfg.lundberg.method != "auto" && cfg.lundberg.method != "analytic" && cfg.lundberg.method != "monte_carlo")
      throw ConfigError("lundberg.method", "expected auto, analytic or monte_carlo");
    if (cfg.lundberg.mc_samples < 2) throw ConfigError("lundberg.mc_samples", "must be at least 2");
    if (!(cfg.lundberg.delta > 0)) throw ConfigError("lundberg.delta", "must be positive");
  }
  if (root.has("ruin")) {
    const Node n = root.object("ruin");
    n.only({"u_grid", "n_paths", "max_steps", "barrier_multiple"});
    if (n.has("u_grid")) cfg.ruin.u_grid = n.numbers("u_grid");
    cfg.ruin.n_paths = n.count("n_paths", cfg.ruin.n_paths);
    cfg.ruin.max_steps = n.count("max_steps", cfg.ruin.max_steps);
    cfg.ruin.barrier_multiple = n.number("barrier_multiple", cfg.ruin.barrier_multiple);
    if (cfg.ruin.u_grid.empty()) throw ConfigError("ruin.u_grid", "must not be empty");
    for (double u : cfg.ruin.u_grid)
      if (!(u >= 0)) throw ConfigError("ruin.u_grid", "initial reserves must be nonnegative");
    if (cfg.ruin.n_paths < 100) throw ConfigError("ruin.n_paths", "need at least 100 paths");
    if (cfg.ruin.max_steps < 1) throw ConfigError("ruin.max_steps", "must be at least 1");
    if (!(cfg.ruin.barrier_multiple > 1)) throw ConfigError("ruin.barrier_multiple", "must exceed 1");
  }
  if (root.has("perpetuity")) {
    const Node n = root.object("perpetuity");
    n.only({"samples", "rel_tol", "n_max", "tail_grid"});
    cfg.perpetuity.samples = n.count("samples", cfg.perpetuity.samples);
    cfg.perpetuity.rel_tol = n.number("rel_tol", cfg.perpetuity.rel_tol);
    cfg.perpetuity.n_max = n.count("n_max", cfg.perpetuity.n_max);
    if (n.has("tail_grid")) cfg.perpetuity.tail_grid = n.numbers("tail_grid");
    if (cfg.perpetuity.samples < 200) throw ConfigError("perpetuity.samples", "need at least 200 samples");
    if (!(cfg.perpetuity.rel_tol > 0 && cfg.perpetuity.rel_tol < 1))
      throw ConfigError("perpetuity.rel_tol", "must lie in (0, 1)");
    if (cfg.perpetuity.n_max < 1) throw ConfigError("perpetuity.n_max", "must be at least 1");
    for (double u : cfg.perpetuity.tail_grid)
      if (!(u > 0)) throw ConfigError("perpetuity.tail_grid", "grid points must be positive");
  }
  if (root.has("simulate")) {
    const Node n = root.object("simulate");
    n.only({"u", "max_steps", "barrier_multiple"});
    cfg.simulate.u = n.number("u", cfg.simulate.u);
    cfg.simulate.max_steps = n.count("max_steps", cfg.simulate.max_steps);
    cfg.simulate.barrier_multiple = n.number("barrier_multiple", cfg.simulate.barrier_multiple);
    if (!(cfg.simulate.u >= 0)) throw ConfigError("simulate.u", "must be nonnegative");
    if (cfg.simulate.max_steps < 1) throw ConfigError("simulate.max_steps", "must be at least 1");
    if (!(cfg.simulate.barrier_multiple > 1)) throw ConfigError("simulate.barrier_multiple", "must exceed 1");
  }
  if (root.has("validate")) {
    const Node n = root.object("validate");
    n.only({"suite"});
    cfg.validate.suite = n.string("suite", cfg.validate.suite);
    if (cfg.validate.suite != "quick" && cfg.validate.suite != "full")
      throw ConfigError("validate.suite", "expected quick or full");
  }
  if (root.has("output")) {
    const Node n = root.object("output");
    n.only({"path", "format"});
    if (n.has("path")) cfg.output.path = n.string("path");
    cfg.output.format = n.string("format", cfg.output.format);
    if (cfg.output.format != "json" && cfg.output.format != "csv")
      throw ConfigError("output.format", "expected json or csv");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace ruinlab
