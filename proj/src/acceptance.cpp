#include "ruinlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "ruinlab/error.hpp"
#include "ruinlab/lundberg.hpp"
#include "ruinlab/numerics.hpp"
#include "ruinlab/perpetuity.hpp"
#include "ruinlab/random.hpp"
#include "ruinlab/ruin.hpp"

namespace ruinlab::acceptance {

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool passed;
  std::string detail;
};

std::uint64_t seed_for(const Options& o, const char* label) { return derive_seed(o.seed, label); }

Outcome lundberg_identity(const Options&) {
  std::vector<std::pair<const char*, Distribution>> taus{
      {"exponential(1)", Distribution::exponential(1.0)},
      {"deterministic(1)", Distribution::deterministic(1.0)},
      {"uniform(0.5,1.5)", Distribution::uniform(0.5, 1.5)}};
  bool ok = true;
  std::string detail;
  for (auto& [name, tau] : taus) {
    ModelConfig c = beta2_config();
    c.interarrival = tau;
    LundbergOptions lo;
    lo.tol = 1e-10;
    const auto rep = lundberg_report(c, lo);
    const double err = rep.beta ? std::abs(*rep.beta - 2.0) : INFINITY;
    ok = ok && rep.method == Method::analytic && err <= 1e-9;
    detail += fmt("%s%s |beta-2|=%.2e", detail.empty() ? "" : ", ", name, err);
  }
  return {ok, detail};
}

Outcome golden_geometry(const Options&) {
  const double a = q_plus_compute(ThetaLaw::point_mass({0.0, 1.0}), 1.0).q_plus;
  const auto sq = q_plus_compute(ThetaLaw::polytope_uniform({{0, 0}, {1, 0}, {0, 1}, {1, 1}}), 1.0);
  const double ea = std::abs(a - kGolden), eb = std::abs(sq.q_plus - kGolden);
  const bool touch = sq.touching_points.size() == 1 && sq.touching_points[0] == ThetaPoint{0.0, 1.0};
  return {ea <= 1e-12 && eb <= 1e-12 && touch,
          fmt("atom err=%.2e, square err=%.2e, square touches (0,1) only: %s", ea, eb, touch ? "yes" : "no")};
}

Outcome zeta_classification(const Options&) {
  const Distribution tau = Distribution::exponential(1.0);
  bool ok = true;
  std::string detail;
  for (double p : {2.0, 3.0, 4.0, 5.0}) {
    const auto g = q_plus_compute(ThetaLaw::zeta_family(p), 1.0);
    const auto r = theorem2_classify(g, tau);
    const Verdict want = p == 2.0 ? Verdict::endpoint_infinite : Verdict::endpoint_finite;
    ok = ok && r.verdict == want;
    detail += fmt("%sp=%g %s", detail.empty() ? "" : ", ", p, to_string(r.verdict).c_str());
  }
  return {ok, detail};
}

Outcome classical_baseline(const Options& o) {
  RuinOptions ro;
  ro.n_paths = 100'000;
  ro.seed = seed_for(o, "classical");
  ro.workers = o.workers;
  ro.barrier_multiple = 25;
  const std::vector<double> grid{0, 1, 2, 4};
  const auto est = estimate_psi_grid(classical_config(), grid, ro);
  bool ok = true;
  std::string detail;
  for (const auto& e : est) {
    const double exact = classical_psi(1.0, 1.0, 2.0, e.u).psi;
    const double z = std::abs(e.psi_hat - exact) / e.ci_halfwidth;
    ok = ok && z <= 3.0 && e.censored == 0;
    detail += fmt("%su=%g psi_hat=%.5f exact=%.5f (%.2f hw)", detail.empty() ? "" : ", ", e.u, e.psi_hat, exact, z);
  }
  return {ok, detail};
}

const std::vector<double> kTailGrid{10, 30, 100, 300};

RuinOptions tail_options(const Options& o, std::size_t n) {
  RuinOptions ro;
  ro.n_paths = n;
  ro.seed = seed_for(o, "power_tail");
  ro.workers = o.workers;
  return ro;
}

Outcome power_law_tail(const Options& o) {
  const auto est = estimate_psi_grid(beta2_config(), kTailGrid, tail_options(o, 1'000'000));
  const TailFit fit = fit_tail(est);
  const BoundsCheck b = bounds_check(2.0, est);
  std::string psi;
  for (const auto& e : est) psi += fmt("%s%.4g", psi.empty() ? "" : "/", e.psi_hat);
  const bool ok = fit.slope >= -2.4 && fit.slope <= -1.6 && b.spread <= 4.0;
  return {ok, fmt("psi_hat=%s slope=%.3f+-%.3f spread=%.2f", psi.c_str(), fit.slope, fit.slope_stderr, b.spread)};
}

Outcome perpetuity_fixed_point(const Options& o) {
  const ModelConfig cfg = beta2_config();
  const std::size_t n = 100'000;
  const auto r_samples =
      sample_R_batch(upper_pair_sampler(cfg), n, 1'000'000, kPerpetuityRelTol, seed_for(o, "fixed_point_R"), o.workers);
  const auto r = converged_values(r_samples);
  const auto pairs = sample_pairs(upper_pair_sampler(cfg), r.size(), seed_for(o, "fixed_point_pairs"), o.workers);
  check_perpetuity_hypotheses(pairs);
  const double ks = ks_fixed_point(r, pairs, seed_for(o, "fixed_point_perm"));

  const std::vector<double> grid{10, 30, 100};
  RuinOptions ro;
  ro.n_paths = n;
  ro.seed = seed_for(o, "sandwich");
  ro.workers = o.workers;
  const auto psi = estimate_psi_grid(cfg, grid, ro);
  const auto rbar_samples =
      sample_Rbar_batch(lower_pair_sampler(cfg), n, 1'000'000, kPerpetuityRelTol, ro.seed, o.workers);
  std::vector<double> rbar;
  for (const auto& s : rbar_samples) rbar.push_back(s.value);

  bool sandwich = true;
  std::string detail = fmt("ks=%.4f converged=%zu/%zu", ks, r.size(), n);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Exceedance up = exceedance(r, grid[j]);
    const Exceedance lo = exceedance(rbar, grid[j]);
    const double se_psi = std::sqrt(psi[j].psi_hat * (1 - psi[j].psi_hat) / static_cast<double>(n));
    const double s_up = std::sqrt(se_psi * se_psi + up.std_error * up.std_error);
    const double s_lo = std::sqrt(se_psi * se_psi + lo.std_error * lo.std_error);
    const bool okj = lo.p - 3 * s_lo <= psi[j].psi_hat && psi[j].psi_hat <= up.p + 3 * s_up;
    sandwich = sandwich && okj;
    detail += fmt(", u=%g %.4f<=%.4f<=%.4f", grid[j], lo.p, psi[j].psi_hat, up.p);
  }
  return {ks <= 0.02 && sandwich, detail};
}

Outcome goldie_consistency(const Options& o) {
  const ModelConfig cfg = beta2_unit_tau_config();
  const auto rep = lundberg_report(cfg);
  if (!rep.beta) return {false, "no Lundberg exponent"};
  const double alpha = *rep.beta;
  const std::size_t n = 1'000'000;
  const auto z_samples =
      sample_R_batch(upper_pair_sampler(cfg), n, 1'000'000, kPerpetuityRelTol, seed_for(o, "goldie_Z"), o.workers);
  const auto z = converged_values(z_samples);
  const auto pairs = sample_pairs(upper_pair_sampler(cfg), z.size(), seed_for(o, "goldie_pairs"), o.workers);
  const GoldieEstimate g = goldie_constant(z, pairs, alpha);
  const double rel = g.std_error / g.c_hat;
  bool tail = true;
  std::string detail = fmt("c_hat=%.1f rel_se=%.4f discarded=%zu", g.c_hat, rel, n - z.size());
  for (double u : {20.0, 40.0, 80.0}) {
    const Exceedance e = exceedance(z, u);
    const double scaled = std::pow(u, alpha) * e.p;
    const double se = std::sqrt(g.std_error * g.std_error + std::pow(std::pow(u, alpha) * e.std_error, 2));
    const bool okj = std::abs(scaled - g.c_hat) <= 3 * se;
    tail = tail && okj;
    detail += fmt(", u=%g u^b P=%.1f (%.1f se)", u, scaled, std::abs(scaled - g.c_hat) / se);
  }
  return {g.c_hat > 0 && rel < 0.1 && tail, detail};
}

Outcome exact_invariances(const Options& o) {
  std::string detail;
  bool ok = true;

  // Monetary scaling.
  const std::vector<double> grid{0, 1, 3, 10, 30, 100};
  RuinOptions ro;
  ro.n_paths = 2000;
  ro.seed = seed_for(o, "invariance");
  ro.workers = o.workers;
  const ModelConfig base = beta2_config();
  const auto ref = estimate_psi_grid(base, grid, ro);
  bool scale_ok = true;
  for (double k : {4.0, 0.5}) {
    std::vector<double> g2;
    for (double u : grid) g2.push_back(k * u);
    const auto est = estimate_psi_grid(base.scaled(k), g2, ro);
    for (std::size_t j = 0; j < grid.size(); ++j)
      scale_ok = scale_ok && est[j].ruined == ref[j].ruined && est[j].barrier_stopped == ref[j].barrier_stopped;
  }
  ok = ok && scale_ok;
  detail += fmt("scaling %s", scale_ok ? "exact" : "BROKEN");

  // Monotonicity under common random numbers.
  bool mono = true;
  for (const ModelConfig& c : {base, classical_config()}) {
    const auto est = estimate_psi_grid(c, {0, 0.5, 1, 2, 5, 10, 20, 50, 100}, ro);
    for (std::size_t j = 1; j < est.size(); ++j) mono = mono && est[j].ruined <= est[j - 1].ruined;
  }
  ok = ok && mono;
  detail += fmt(", monotone %s", mono ? "yes" : "NO");

  // phi(0) = 1.
  bool phi0 = true;
  const Distribution tau = Distribution::exponential(1.0);
  for (const ThetaLaw& th :
       {ThetaLaw::point_mass({0.06, 0.02}), ThetaLaw::polytope_uniform({{0, 0}, {1, 0}, {0, 1}, {1, 1}}),
        ThetaLaw::zeta_family(2.0), ThetaLaw::product(Distribution::uniform(0.05, 0.1), Distribution::uniform(0.01, 0.02))})
    phi0 = phi0 && phi_nu_analytic(th, tau, 0.0) == MgfValue(1.0);
  const auto est0 = phi_nu_mc(base, 0.0, 1000, ro.seed, o.workers);
  phi0 = phi0 && est0.estimate == 1.0 && est0.std_error == 0.0;
  ok = ok && phi0;
  detail += fmt(", phi(0)=1 %s", phi0 ? "yes" : "NO");

  // H >= 0 on sampled Theta.
  const double a = std::atan(kGolden);
  const double dx = std::cos(a), dy = std::sin(a);
  const std::vector<ThetaLaw> laws{
      ThetaLaw::polytope_uniform({{0, 0}, {1, 0}, {0, 1}, {1, 1}}),
      ThetaLaw::polytope_uniform({{0, 1}, {dx, 1 + dy}, {dx + dy, 1 + dy - dx}, {dy, 1 - dx}}),
      ThetaLaw::zeta_family(2.0),
      ThetaLaw::finite({{0.06, 0.02}, {0.1, 0.03}, {-0.02, 0.01}}, {0.5, 0.25, 0.25}),
      ThetaLaw::product(Distribution::uniform(0.05, 0.1), Distribution::uniform(0.01, 0.02))};
  double h_min = INFINITY;
  Engine rng(seed_for(o, "theta_draws"));
  for (const auto& th : laws) {
    const auto geo = q_plus_compute(th, 1.0);
    for (int i = 0; i < 100'000; ++i) h_min = std::min(h_min, geo.h(th.sample(rng)));
  }
  ok = ok && h_min >= 0.0;
  detail += fmt(", min H=%.3g", h_min);
  return {ok, detail};
}

Outcome random_walk_diagnostic(const Options& o) {
  const ModelConfig cfg = beta2_config();
  RuinOptions ro = tail_options(o, 1'000'000);
  ro.seed = seed_for(o, "walk");
  const auto walk = rw_max_diagnostic(cfg, kTailGrid, ro);
  const auto psi = estimate_psi_grid(cfg, kTailGrid, tail_options(o, 200'000));
  std::vector<double> lu, lp, ls;
  for (std::size_t j = 0; j < kTailGrid.size(); ++j) {
    if (!(walk[j].p_hat > 0) || !(psi[j].psi_hat > 0)) return {false, "zero exceedance estimate on the grid"};
    lu.push_back(std::log(kTailGrid[j]));
    lp.push_back(std::log(walk[j].p_hat));
    ls.push_back(std::log(psi[j].psi_hat));
  }
  const double slope = numerics::linear_fit(lu, lp).slope;
  const double corr = numerics::pearson_correlation(lp, ls);
  const bool ok = std::abs(slope + 2.0) <= 0.2 * 2.0 && corr >= 0.95;
  return {ok, fmt("walk slope=%.3f corr=%.4f", slope, corr)};
}

struct Entry {
  const char* name;
  double budget_seconds;
  std::function<Outcome(const Options&)> fn;
};

const Entry& entry(int id) {
  static const std::vector<Entry> entries{
      {"lundberg_identity", 1.0, lundberg_identity},
      {"golden_ratio_geometry", 1.0, golden_geometry},
      {"zeta_classification", 5.0, zeta_classification},
      {"classical_baseline", 30.0, classical_baseline},
      {"power_law_tail", 900.0, power_law_tail},
      {"perpetuity_fixed_point", 300.0, perpetuity_fixed_point},
      {"goldie_constant", 600.0, goldie_consistency},
      {"exact_invariances", INFINITY, exact_invariances},
      {"random_walk_diagnostic", 300.0, random_walk_diagnostic}};
  if (id < 1 || id > kCriteria) throw ConfigError("criterion", "unknown criterion " + std::to_string(id));
  return entries[static_cast<std::size_t>(id - 1)];
}

}  // namespace

ModelConfig beta2_config() {
  ModelConfig c;
  c.claim = Distribution::exponential(1.0);
  c.interarrival = Distribution::exponential(1.0);
  c.regime = regime::Constant{ThetaLaw::point_mass({0.06, 0.02})};
  c.premium = premium::Constant{0.1};
  c.mu_lower = 0.06;
  c.sigma_upper = 0.2;
  c.c_bar = 0.1;
  c.grid_step = 0.05;
  return c;
}

ModelConfig beta2_unit_tau_config() {
  ModelConfig c = beta2_config();
  c.interarrival = Distribution::deterministic(1.0);
  return c;
}

ModelConfig classical_config() {
  ModelConfig c;
  c.claim = Distribution::exponential(1.0);
  c.interarrival = Distribution::exponential(1.0);
  c.regime = regime::None{};
  c.premium = premium::Constant{2.0};
  c.c_bar = 2.0;
  return c;
}

CriterionResult run_criterion(int id, const Options& options) {
  const Entry& e = entry(id);
  CriterionResult r;
  r.id = id;
  r.name = e.name;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out{false, ""};
  try {
    out = e.fn(options);
  } catch (const std::exception& ex) {
    out = {false, std::string("error: ") + ex.what()};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.passed = out.passed && r.seconds < e.budget_seconds;
  r.detail = out.detail;
  if (out.passed && !r.passed) r.detail += fmt(", over the %.0f s budget", e.budget_seconds);
  return r;
}

std::vector<int> suite_ids(const std::string& suite) {
  if (suite == "quick") return {1, 2, 3, 4, 8};
  if (suite == "full") return {1, 2, 3, 4, 5, 6, 7, 8, 9};
  throw ConfigError("validate.suite", "expected quick or full");
}

std::vector<CriterionResult> run_suite(const std::string& suite, const Options& options) {
  std::vector<CriterionResult> out;
  for (int id : suite_ids(suite)) out.push_back(run_criterion(id, options));
  return out;
}

std::string format_line(const CriterionResult& r) {
  return fmt("criterion %d %s: %s (%s) [%.1fs]", r.id, r.name.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str(),
             r.seconds);
}

}  // namespace ruinlab::acceptance
