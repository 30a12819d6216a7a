#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("ruinlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Run run(const std::string& args, const std::string& env = "") {
  const fs::path out = scratch() / "stdout", err = scratch() / "stderr";
  const std::string cmd = env + " " + RUINLAB_CLI + " " + args + " >" + out.string() + " 2>" + err.string();
  const int rc = std::system(cmd.c_str());
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, slurp(out), slurp(err)};
}

std::string config(const std::string& name) { return std::string(RUINLAB_CONFIGS) + "/" + name; }

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("lundberg on the golden example reports the golden ratio") {
  const Run r = run("lundberg --config " + config("golden.json"));
  REQUIRE(r.status == 0);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["q_plus"].get<double>() - (std::sqrt(5.0) - 1) / 2) < 1e-10);
  CHECK(j["endpoint"]["verdict"] == "endpoint_infinite");
}

TEST_CASE("same seed gives byte-identical output files") {
  const std::string base = "ruin --config " + config("beta2.json") + " --paths 3000 --u 5,10,20,40 --seed 42";
  REQUIRE(run(base + " --output " + (scratch() / "a.json").string()).status == 0);
  REQUIRE(run(base + " --workers 3 --output " + (scratch() / "b.json").string()).status == 0);
  const std::string a = slurp(scratch() / "a.json");
  CHECK(!a.empty());
  CHECK(a == slurp(scratch() / "b.json"));
  REQUIRE(run("ruin --config " + config("beta2.json") + " --paths 3000 --u 5,10,20,40 --seed 43 --output " +
              (scratch() / "c.json").string())
              .status == 0);
  CHECK(a != slurp(scratch() / "c.json"));
}

TEST_CASE("RUINLAB_SEED overrides the config seed and --seed overrides both") {
  const std::string base = "simulate --config " + config("beta2.json") + " --u 50";
  const Run env = run(base, "RUINLAB_SEED=1234");
  const Run flag = run(base + " --seed 1234");
  const Run both = run(base + " --seed 1234", "RUINLAB_SEED=99");
  const Run plain = run(base);
  REQUIRE(env.status == 0);
  CHECK(env.out == flag.out);
  CHECK(both.out == flag.out);
  CHECK(plain.out != env.out);
  CHECK(run(base, "RUINLAB_SEED=abc").status == 1);
}

TEST_CASE("ruin csv and plot data") {
  const fs::path csv = scratch() / "psi.csv", plot = scratch() / "plot.csv";
  const Run r = run("ruin --config " + config("classical.json") + " --paths 2000 --format csv --output " +
                    csv.string() + " --emit-plot-data " + plot.string());
  REQUIRE(r.status == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("u,psi_hat,ci_lo,ci_hi,", 0) == 0);
  CHECK(slurp(plot).rfind("log_u,log_psi_hat\n", 0) == 0);
  CHECK(fs::exists(scratch() / "psi.tailfit.json"));
}

TEST_CASE("simulate dumps a trajectory") {
  const fs::path dump = scratch() / "traj.csv";
  const Run r = run("simulate --config " + config("beta2.json") + " --dump " + dump.string());
  REQUIRE(r.status == 0);
  CHECK(slurp(dump).rfind("n,S_n,lambda_n,zeta_n,nu_n\n0,10,,,\n", 0) == 0);
  const json j = json::parse(r.out);
  CHECK(j.contains("stopped_reason"));
}

TEST_CASE("perpetuity report keys") {
  const Run r = run("perpetuity --config " + config("beta2.json") + " --samples 20000");
  REQUIRE(r.status == 0);
  const json j = json::parse(r.out);
  for (const char* k : {"beta_used", "c_hat", "stderr", "ks", "tail_slope"}) CHECK(j.contains(k));
  CHECK(j["beta_used"].get<double>() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(j["ks"].get<double>() < 0.05);
}

TEST_CASE("missing field is a schema error naming it") {
  const fs::path p = write_config("missing.json", R"({"version": 1, "seed": 1, "model": {
    "claim": {"kind": "exponential", "rate": 1}, "interarrival": {"kind": "exponential", "rate": 1},
    "regime": {"mode": "none"}, "premium": {"mode": "constant", "c": 2}, "mu_lower": 0, "sigma_upper": 1}})");
  const Run r = run("ruin --config " + p.string());
  CHECK(r.status == 1);
  const json j = json::parse(r.err);
  CHECK(j["error"] == "config");
  CHECK(j["field"] == "model.c_bar");
}

TEST_CASE("hypothesis violations are reported as JSON, not crashes") {
  Run r = run("ruin --config " + config("heavy_claims.json"));
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["condition"] == "claim_moment");

  r = run("validate --config " + config("heavy_claims.json"));
  CHECK(r.status == 2);
  CHECK(r.out.find("hypothesis claim_moment: FAIL") != std::string::npos);

  const fs::path loss = write_config("loss.json", R"({"version": 1, "seed": 1, "model": {
    "claim": {"kind": "exponential", "rate": 1}, "interarrival": {"kind": "exponential", "rate": 1},
    "regime": {"mode": "none"}, "premium": {"mode": "constant", "c": 0.5}, "mu_lower": 0, "sigma_upper": 1,
    "c_bar": 0.5}})");
  r = run("ruin --config " + loss.string());
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["condition"] == "SafLoaCon");
  CHECK(run("ruin --config " + loss.string() + " --allow-violations --paths 500 --u 1,2 --max-steps 100").status == 0);

  const fs::path drift = write_config("drift.json", R"({"version": 1, "seed": 1, "model": {
    "claim": {"kind": "exponential", "rate": 1}, "interarrival": {"kind": "exponential", "rate": 1},
    "regime": {"mode": "constant", "theta": {"kind": "point_mass", "mu": 0.02, "half_sigma2": 0.02}},
    "premium": {"mode": "constant", "c": 0.1}, "mu_lower": 0.02, "sigma_upper": 0.2, "c_bar": 0.1}})");
  r = run("lundberg --config " + drift.string());
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["condition"] == "mu_si_0");

  const fs::path wide = write_config("wide.json", R"({"version": 1, "seed": 1, "model": {
    "claim": {"kind": "exponential", "rate": 1}, "interarrival": {"kind": "exponential", "rate": 1},
    "regime": {"mode": "constant", "theta": {"kind": "point_mass", "mu": 0.06, "half_sigma2": 0.02}},
    "premium": {"mode": "constant", "c": 0.1}, "mu_lower": 0.06, "sigma_upper": 0.7, "c_bar": 0.1}})");
  r = run("ruin --config " + wide.string());
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["condition"] == "cond_tau");
}

TEST_CASE("bad invocations") {
  CHECK(run("").status == 1);
  CHECK(run("lundberg").status == 1);
  CHECK(run("lundberg --config /nonexistent.json").status == 1);
  const fs::path bad = write_config("syntax.json", "{\n  \"version\": 1,\n  oops\n}");
  const Run r = run("lundberg --config " + bad.string());
  CHECK(r.status == 1);
  CHECK(json::parse(r.err)["field"] == "json");
}

TEST_CASE("quick validation suite passes") {
  const Run r = run("validate --suite quick --workers 1");
  CHECK(r.status == 0);
  for (int id : {1, 2, 3, 4, 8}) CHECK(r.out.find("criterion " + std::to_string(id) + " ") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}
