#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruinlab/acceptance.hpp"
#include "ruinlab/config.hpp"
#include "ruinlab/embedded.hpp"
#include "ruinlab/error.hpp"
#include "ruinlab/kernels.hpp"
#include "ruinlab/lundberg.hpp"
#include "ruinlab/perpetuity.hpp"
#include "ruinlab/random.hpp"
#include "ruinlab/ruin.hpp"

using namespace ruinlab;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kHypothesis = 2, kNumerical = 3, kValidation = 4 };

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  std::optional<std::string> output;
  std::optional<std::string> format;
  // lundberg
  std::optional<double> tol;
  std::optional<std::string> method;
  // ruin
  std::vector<double> u_grid;
  std::optional<double> paths;
  std::optional<double> max_steps;
  std::optional<double> barrier_multiple;
  std::optional<std::string> plot_data;
  bool allow_violations = false;
  // perpetuity
  std::optional<double> samples;
  // simulate
  std::optional<double> u;
  std::optional<std::string> dump;
  // validate
  std::optional<std::string> suite;
};

json ext(const ExtReal& v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}

template <class T>
json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, ExtReal>)
    return ext(*v);
  else
    return *v;
}

std::size_t as_count(double v, const std::string& flag) {
  if (!(v >= 1) || v != std::floor(v) || v > 1e15) throw ConfigError(flag, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

std::uint64_t parse_seed(const std::string& text, const std::string& field) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos, 0);
    if (pos != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an unsigned 64-bit integer, got '" + text + "'");
  }
}

ExperimentConfig load(const Flags& f) {
  if (f.config_path.empty()) throw ConfigError("--config", "a config file is required");
  ExperimentConfig cfg = load_config(f.config_path);
  if (const char* env = std::getenv("RUINLAB_SEED"); env != nullptr && *env != '\0')
    cfg.seed = parse_seed(env, "RUINLAB_SEED");
  if (f.seed) cfg.seed = *f.seed;
  if (f.output) cfg.output.path = *f.output;
  if (f.format) {
    if (*f.format != "json" && *f.format != "csv") throw ConfigError("--format", "expected json or csv");
    cfg.output.format = *f.format;
  }
  return cfg;
}

void emit(const ExperimentConfig& cfg, const std::string& text, const std::string& summary) {
  if (!cfg.output.path) {
    std::cout << text;
    return;
  }
  std::ofstream os(*cfg.output.path, std::ios::binary);
  if (!os) throw ConfigError("output.path", "cannot write " + *cfg.output.path);
  os << text;
  std::cout << summary << "\n";
}

json geometry_json(const TangentGeometry& g) {
  json pts = json::array();
  for (const auto& p : g.touching_points) pts.push_back({p.mu, p.half_sigma2});
  return {{"q_plus", g.q_plus}, {"q_tau", g.q_tau}, {"touching_points", pts}};
}

json report_json(const LundbergReport& r) {
  json j;
  j["beta"] = opt(r.beta);
  j["q_nu"] = opt(r.q_nu);
  j["q_plus"] = r.geometry ? json(r.geometry->q_plus) : json(nullptr);
  j["phi_at_endpoint"] = opt(r.phi_at_endpoint);
  j["method"] = r.method == Method::analytic ? "analytic" : "monte_carlo";
  j["ci_halfwidth"] = opt(r.ci_halfwidth);
  j["geometry"] = r.geometry ? geometry_json(*r.geometry) : json(nullptr);
  if (r.theorem2) {
    j["endpoint"] = {{"verdict", to_string(r.theorem2->verdict)},
                     {"integral_value", opt(r.theorem2->integral_value)},
                     {"heuristic", r.theorem2->heuristic},
                     {"fitted_exponent", opt(r.theorem2->fitted_exponent)},
                     {"kappa", r.theorem2->kappa}};
  } else {
    j["endpoint"] = nullptr;
  }
  j["stability_flag"] = r.stability_flag;
  j["hypotheses"] = {{"EK_positive", r.flags.ek_positive},
                     {"claim_moment", r.flags.claim_moment_ok},
                     {"cond_tau", r.flags.cond_tau_ok},
                     {"tau_infi", r.flags.tau_infi}};
  j["warnings"] = r.warnings;
  return j;
}

LundbergOptions lundberg_options(const ExperimentConfig& cfg, const Flags& f) {
  LundbergOptions lo;
  lo.tol = f.tol.value_or(cfg.lundberg.tol);
  const std::string method = f.method.value_or(cfg.lundberg.method);
  if (method == "monte_carlo")
    lo.force_monte_carlo = true;
  else if (method == "analytic" && !cfg.model.constant_coefficients())
    throw ConfigError("lundberg.method", "analytic evaluation needs constant coefficients");
  else if (method != "auto" && method != "analytic")
    throw ConfigError("lundberg.method", "expected auto, analytic or monte_carlo");
  lo.mc_samples = cfg.lundberg.mc_samples;
  lo.seed = derive_seed(cfg.seed, "lundberg");
  lo.workers = f.workers;
  lo.classify_delta = cfg.lundberg.delta;
  return lo;
}

struct Check {
  std::string condition;
  bool ok;
  std::string detail;
};

// Hypotheses needed for the ruin asymptotics of a configured model.
std::vector<Check> hypothesis_checks(const ExperimentConfig& cfg, const Flags& f) {
  const ModelConfig& m = cfg.model;
  m.validate();
  std::vector<Check> out;
  if (std::holds_alternative<regime::None>(m.regime)) {
    const double c = premium_rate(m.premium, 0.0);
    const double income = c * m.interarrival.mean().value();
    const ExtReal claims = m.claim.mean();
    const bool ok = std::holds_alternative<premium::Constant>(m.premium) && claims.is_finite() &&
                    income > claims.value();
    out.push_back({"SafLoaCon", ok, "premium income per claim must exceed the mean claim"});
    return out;
  }
  try {
    const LundbergReport r = lundberg_report(m, lundberg_options(cfg, f));
    out.push_back({m.constant_coefficients() ? "mu_si_0" : "EK_positive", true, "E K > 0"});
    if (!r.beta) {
      out.push_back({"claim_moment", false, "no Lundberg exponent, so the claim moment cannot be checked"});
      return out;
    }
    std::ostringstream b;
    b.precision(6);
    b << "beta = " << *r.beta;
    out.push_back({"claim_moment", r.flags.claim_moment_ok, "E xi^beta must be finite, " + b.str()});
    out.push_back({"cond_tau", r.flags.cond_tau_ok, "inter-arrival mgf must extend past the beta bound, " + b.str()});
  } catch (const HypothesisViolation& e) {
    out.push_back({e.condition(), false, e.what()});
  }
  return out;
}

void require(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.ok) throw HypothesisViolation(c.condition, c.detail);
}

int cmd_lundberg(const Flags& f) {
  const ExperimentConfig cfg = load(f);
  const LundbergReport r = lundberg_report(cfg.model, lundberg_options(cfg, f));
  const json j = report_json(r);
  std::ostringstream s;
  s << "beta=" << j["beta"].dump() << " q_plus=" << j["q_plus"].dump() << " method=" << j["method"].get<std::string>();
  emit(cfg, j.dump(2) + "\n", s.str());
  return kOk;
}

std::string num(double v) {
  char buf[32];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

std::string ruin_csv(const std::vector<RuinEstimate>& est) {
  std::ostringstream os;
  os << "u,psi_hat,ci_lo,ci_hi,ci_halfwidth,n_paths,ruined,censored,censored_fraction\n";
  for (const auto& e : est)
    os << num(e.u) << ',' << num(e.psi_hat) << ',' << num(e.ci_lo) << ',' << num(e.ci_hi) << ','
       << num(e.ci_halfwidth) << ',' << e.n_paths << ',' << e.ruined << ',' << e.censored << ','
       << num(e.censored_fraction) << '\n';
  return os.str();
}

json tail_json(const std::vector<RuinEstimate>& est, std::vector<std::string>& warnings) {
  try {
    const TailFit fit = fit_tail(est);
    return {{"slope", fit.slope},         {"slope_stderr", fit.slope_stderr}, {"intercept", fit.intercept},
            {"u_grid", fit.u_grid},       {"r_squared", fit.r_squared},       {"dropped", fit.dropped}};
  } catch (const Error& e) {
    warnings.push_back(std::string("no tail fit: ") + e.what());
    return nullptr;
  }
}

int cmd_ruin(const Flags& f) {
  const ExperimentConfig cfg = load(f);
  std::vector<std::string> warnings;
  const auto checks = hypothesis_checks(cfg, f);
  if (f.allow_violations) {
    for (const auto& c : checks)
      if (!c.ok) warnings.push_back(c.condition + " violated: " + c.detail);
  } else {
    require(checks);
  }
  RuinOptions ro;
  ro.n_paths = f.paths ? as_count(*f.paths, "--paths") : cfg.ruin.n_paths;
  ro.max_steps = f.max_steps ? as_count(*f.max_steps, "--max-steps") : cfg.ruin.max_steps;
  ro.barrier_multiple = f.barrier_multiple.value_or(cfg.ruin.barrier_multiple);
  ro.seed = cfg.seed;
  ro.workers = f.workers;
  const std::vector<double> grid = f.u_grid.empty() ? cfg.ruin.u_grid : f.u_grid;
  const auto est = estimate_psi_grid(cfg.model, grid, ro);
  const json tail = tail_json(est, warnings);

  if (f.plot_data) {
    std::ofstream os(*f.plot_data, std::ios::binary);
    if (!os) throw ConfigError("--emit-plot-data", "cannot write " + *f.plot_data);
    os << "log_u,log_psi_hat\n";
    for (const auto& e : est)
      if (e.u > 0 && e.psi_hat > 0) os << num(std::log(e.u)) << ',' << num(std::log(e.psi_hat)) << '\n';
  }

  std::ostringstream s;
  s << "ruin: " << est.size() << " levels, " << ro.n_paths << " paths";
  if (!tail.is_null()) s << ", tail slope " << tail["slope"].get<double>();
  if (cfg.output.format == "csv") {
    emit(cfg, ruin_csv(est), s.str());
    json side = {{"tail_fit", tail}, {"warnings", warnings}};
    if (cfg.output.path) {
      std::ofstream os(std::filesystem::path(*cfg.output.path).replace_extension(".tailfit.json"), std::ios::binary);
      os << side.dump(2) << "\n";
    } else {
      std::cerr << side.dump() << "\n";
    }
    return kOk;
  }
  json rows = json::array();
  for (const auto& e : est)
    rows.push_back({{"u", e.u},
                    {"psi_hat", e.psi_hat},
                    {"ci", {e.ci_lo, e.ci_hi}},
                    {"censored_fraction", e.censored_fraction},
                    {"ruined", e.ruined},
                    {"censored", e.censored}});
  const json j = {{"n_paths", ro.n_paths}, {"seed", cfg.seed}, {"estimates", rows}, {"tail_fit", tail},
                  {"warnings", warnings}};
  emit(cfg, j.dump(2) + "\n", s.str());
  return kOk;
}

int cmd_perpetuity(const Flags& f) {
  const ExperimentConfig cfg = load(f);
  const ModelConfig& m = cfg.model;
  const std::size_t n = f.samples ? as_count(*f.samples, "--samples") : cfg.perpetuity.samples;
  std::vector<std::string> warnings;

  const LundbergReport rep = lundberg_report(m, lundberg_options(cfg, f));
  const PairSampler sampler = upper_pair_sampler(m);
  const auto raw = sample_R_batch(sampler, n, cfg.perpetuity.n_max, cfg.perpetuity.rel_tol,
                                  derive_seed(cfg.seed, "perpetuity_R"), f.workers);
  const auto r = converged_values(raw);
  if (r.size() < n) warnings.push_back(std::to_string(n - r.size()) + " samples did not converge and were dropped");
  if (r.empty()) throw NumericalError("no perpetuity sample converged");
  const auto pairs = sample_pairs(sampler, r.size(), derive_seed(cfg.seed, "perpetuity_pairs"), f.workers);
  check_perpetuity_hypotheses(pairs);
  const double ks = ks_fixed_point(r, pairs, derive_seed(cfg.seed, "perpetuity_perm"));

  json c_hat = nullptr, se = nullptr;
  if (rep.beta) {
    try {
      const GoldieEstimate g = goldie_constant(r, pairs, *rep.beta);
      c_hat = g.c_hat;
      se = g.std_error;
    } catch (const NumericalError& e) {
      warnings.push_back(std::string("no tail constant: ") + e.what());
    }
  } else {
    warnings.push_back("no Lundberg exponent, tail constant skipped");
  }
  json slope = nullptr;
  try {
    slope = tail_slope(r, cfg.perpetuity.tail_grid).slope;
  } catch (const Error& e) {
    warnings.push_back(std::string("no tail slope: ") + e.what());
  }
  for (const auto& w : rep.warnings) warnings.push_back(w);

  const json j = {{"beta_used", opt(rep.beta)}, {"c_hat", c_hat}, {"stderr", se},          {"ks", ks},
                  {"tail_slope", slope},        {"samples", r.size()}, {"warnings", warnings}};
  std::ostringstream s;
  s << "perpetuity: ks=" << ks << " c_hat=" << c_hat.dump();
  emit(cfg, j.dump(2) + "\n", s.str());
  return kOk;
}

int cmd_simulate(const Flags& f) {
  const ExperimentConfig cfg = load(f);
  const double u = f.u.value_or(cfg.simulate.u);
  const std::size_t steps = f.max_steps ? as_count(*f.max_steps, "--max-steps") : cfg.simulate.max_steps;
  StreamSet streams(cfg.seed, 0);
  const ChainTrajectory t =
      simulate_chain(u, cfg.model, steps, f.barrier_multiple.value_or(cfg.simulate.barrier_multiple), streams);
  if (f.dump) {
    std::ofstream os(*f.dump, std::ios::binary);
    if (!os) throw ConfigError("--dump", "cannot write " + *f.dump);
    write_trajectory_csv(os, t);
  }
  const json j = {{"u", u},
                  {"steps", t.values.size() - 1},
                  {"ruined", t.ruin_index.has_value()},
                  {"ruin_index", opt(t.ruin_index)},
                  {"stopped_reason", to_string(t.stopped_reason)},
                  {"final_value", t.values.back()}};
  std::ostringstream s;
  s << "simulate: " << j["steps"].dump() << " steps, stopped by " << to_string(t.stopped_reason);
  emit(cfg, j.dump(2) + "\n", s.str());
  return kOk;
}

int cmd_validate(const Flags& f) {
  bool failed = false;
  std::optional<ExperimentConfig> cfg;
  if (!f.config_path.empty()) {
    cfg = load(f);
    for (const auto& c : hypothesis_checks(*cfg, f)) {
      std::cout << "hypothesis " << c.condition << ": " << (c.ok ? "PASS" : "FAIL") << " (" << c.detail << ")\n";
      failed = failed || !c.ok;
    }
    if (!f.suite) return failed ? kHypothesis : kOk;
  }
  const std::string suite = f.suite.value_or(cfg ? cfg->validate.suite : "quick");
  acceptance::Options o;
  o.workers = f.workers;
  if (cfg) o.seed = cfg->seed;
  if (f.seed) o.seed = *f.seed;
  std::cout << "isa " << kernels::active().isa << "\n" << std::flush;
  for (int id : acceptance::suite_ids(suite)) {
    const auto r = acceptance::run_criterion(id, o);
    std::cout << acceptance::format_line(r) << "\n" << std::flush;
    failed = failed || !r.passed;
  }
  return failed ? kValidation : kOk;
}

void print_error(const std::string& kind, const std::string& key, const std::string& value,
                 const std::string& message) {
  json j = {{"error", kind}};
  if (!key.empty()) j[key] = value;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ruinlab: ruin probabilities for risk processes with stochastic investment returns"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config_path, "Experiment config (JSON)");
    sub->add_option_function<std::string>(
        "--seed", [&](const std::string& s) { f.seed = parse_seed(s, "--seed"); }, "Master seed");
    sub->add_option("--workers", f.workers, "Worker threads (0 = available parallelism)");
    sub->add_option_function<std::string>("--output", [&](const std::string& s) { f.output = s; },
                                          "Write results to this file");
    sub->add_option_function<std::string>("--format", [&](const std::string& s) { f.format = s; },
                                          "json or csv");
  };

  auto* lund = app.add_subcommand("lundberg", "Lundberg exponent and tangent geometry");
  common(lund);
  lund->add_option_function<double>("--tol", [&](double v) { f.tol = v; }, "Root tolerance");
  lund->add_option_function<std::string>("--method", [&](const std::string& s) { f.method = s; },
                                         "auto, analytic or monte_carlo");

  auto* ruin = app.add_subcommand("ruin", "Monte Carlo ruin probabilities and tail fit");
  common(ruin);
  ruin->add_option("--u", f.u_grid, "Initial capital grid")->delimiter(',');
  ruin->add_option_function<double>("--paths", [&](double v) { f.paths = v; }, "Paths per level");
  ruin->add_option_function<double>("--max-steps", [&](double v) { f.max_steps = v; }, "Claims per path");
  ruin->add_option_function<double>("--barrier-multiple", [&](double v) { f.barrier_multiple = v; },
                                    "Survival barrier multiple");
  ruin->add_option_function<std::string>("--emit-plot-data", [&](const std::string& s) { f.plot_data = s; },
                                         "Write (log u, log psi_hat) pairs as CSV");
  ruin->add_flag("--allow-violations", f.allow_violations, "Run even if a hypothesis fails");

  auto* perp = app.add_subcommand("perpetuity", "Perpetuity fixed point and tail constant");
  common(perp);
  perp->add_option_function<double>("--samples", [&](double v) { f.samples = v; }, "Perpetuity samples");
  perp->add_option_function<std::string>("--method", [&](const std::string& s) { f.method = s; },
                                         "Lundberg method: auto, analytic or monte_carlo");

  auto* sim = app.add_subcommand("simulate", "Single embedded-chain trajectory");
  common(sim);
  sim->add_option_function<double>("--u", [&](double v) { f.u = v; }, "Initial capital");
  sim->add_option_function<double>("--max-steps", [&](double v) { f.max_steps = v; }, "Claims");
  sim->add_option_function<double>("--barrier-multiple", [&](double v) { f.barrier_multiple = v; },
                                   "Survival barrier multiple");
  sim->add_option_function<std::string>("--dump", [&](const std::string& s) { f.dump = s; },
                                        "Trajectory CSV path");

  auto* val = app.add_subcommand("validate", "Acceptance suite and config hypothesis checks");
  common(val);
  val->add_option_function<std::string>("--suite", [&](const std::string& s) { f.suite = s; }, "quick or full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", "", "", e.what());
    return kConfig;
  } catch (const ConfigError& e) {
    print_error("config", "field", e.field(), e.what());
    return kConfig;
  }

  try {
    if (lund->parsed()) return cmd_lundberg(f);
    if (ruin->parsed()) return cmd_ruin(f);
    if (perp->parsed()) return cmd_perpetuity(f);
    if (sim->parsed()) return cmd_simulate(f);
    return cmd_validate(f);
  } catch (const ConfigError& e) {
    print_error("config", "field", e.field(), e.what());
    return kConfig;
  } catch (const HypothesisViolation& e) {
    print_error("hypothesis", "condition", e.condition(), e.what());
    return kHypothesis;
  } catch (const std::exception& e) {
    print_error("numerical", "", "", e.what());
    return kNumerical;
  }
}
