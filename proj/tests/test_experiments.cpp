#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hicon/experiments.hpp"
#include "json.hpp"

using namespace hicon;
using namespace hicon::exp;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hicon_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

const std::vector<double> kEps{0.25, 0.125, 0.0625, 0.03125, 0.015625};

}  // namespace

TEST_CASE("fit_slope on exact power laws") {
  std::vector<double> y2, y3;
  for (double x : kEps) {
    y2.push_back(x * x);
    y3.push_back(3 * x * x);
  }
  auto f = fit_slope(kEps, y2);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.residual <= 1e-12);
  f = fit_slope(kEps, y3);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("fit_slope with a cubic perturbation") {
  std::vector<double> y;
  for (double x : kEps) y.push_back(x * x + x * x * x);
  const auto f = fit_slope(kEps, y);
  CHECK(f.slope >= 1.9);
  CHECK(f.slope <= 2.1);
}

TEST_CASE("fit_slope rejects degenerate input") {
  CHECK_THROWS_AS(fit_slope({1, 1, 1, 1}, {1, 2, 3, 4}), DegenerateFit);
  CHECK_THROWS_AS(fit_slope({1, 2, 3}, {1, 2, 3}), DegenerateFit);
  CHECK_THROWS_AS(fit_slope({1, 2, 3, -4}, {1, 2, 3, 4}), DegenerateFit);
}

TEST_CASE("config validation names the offending field") {
  auto expect_field = [](const std::string& text, const std::string& field) {
    try {
      parse_config(text);
      FAIL("no error for " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  expect_field(R"({"z_list": [[1.0, 0.0]]})", "z_list");
  expect_field(R"({"eps_grid": [0.1, 0.2, 0.05, 0.01]})", "eps_grid");
  expect_field(R"({"eps_grid": [0.25, 0.125, 0.0625]})", "eps_grid");
  expect_field(R"({"sigma": -1})", "sigma");
  expect_field(R"({"experiments": ["nope"]})", "experiments");
  expect_field(R"({"tau_grid": {"oracle": [[4.0, 0.0]]}})", "tau_grid");
  expect_field(R"({"z_list": 3})", "z_list");
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("config JSON round trip preserves the hash") {
  RunConfig c;
  c.experiments = {"mesh", "steklov"};
  c.eps_grid = {0.5, 0.25, 0.125, 0.0625};
  c.z_list = {{1, 2}, {-3, 0.75}};
  c.geometry.r_in = 0.15;
  const RunConfig d = parse_config(config_to_json(c));
  CHECK(config_hash(d) == config_hash(c));
  CHECK(d.z_list[1] == cd(-3, 0.75));
  CHECK(d.geometry.r_in == 0.15);
  c.seed += 1;
  CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("empty experiment list writes a metadata-only summary") {
  RunConfig c;
  const auto dir = scratch_dir("empty");
  const auto s = run(c, dir);
  CHECK(s.passed);
  CHECK(s.results.empty());
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["config_hash"] == config_hash(c));
  CHECK(j["seed"] == 0x5EED);
  CHECK(j["experiments"].empty());
  CHECK(j.contains("timestamp"));
  CHECK(j.contains("code_version"));
}

TEST_CASE("repeated runs give byte-identical CSV") {
  RunConfig c;
  c.geometry.h = 0.1;
  c.geometry.n_bnd = 32;
  c.mesh_sizes = {0.1};
  c.experiments = {"mesh", "correctors"};
  const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
  const auto ra = run(c, a);
  run(c, b);
  CHECK(ra.passed);
  for (const auto& e : c.experiments) {
    const std::string x = slurp(a / (e + ".csv"));
    CHECK(!x.empty());
    CHECK(x == slurp(b / (e + ".csv")));
  }
}

TEST_CASE("failing check is named in the summary") {
  RunConfig c;
  c.geometry.h = 0.1;
  c.geometry.n_bnd = 32;
  c.mesh_sizes = {0.1};
  c.tol.ratio_rel = 1e-9;
  c.experiments = {"mesh", "correctors"};
  const auto dir = scratch_dir("fail");
  const auto s = run(c, dir);
  CHECK_FALSE(s.passed);
  CHECK(s.first_failure.find("correctors: ratio") == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["passed"] == false);
  CHECK(j["first_failure"] == s.first_failure);
}

TEST_CASE("known deviations do not fail a result") {
  ExperimentResult r;
  Check c;
  c.passed = false;
  c.known_deviation = true;
  r.checks.push_back(c);
  CHECK(r.passed());
  r.checks.back().known_deviation = false;
  CHECK_FALSE(r.passed());
}

TEST_CASE("CSV formatting") {
  Table t;
  t.columns = {"a", "b"};
  t.add({fmt_num(0.5), fmt_int(3)});
  CHECK(t.to_csv() == "a,b\n5.000000000000e-01,3\n");
}

TEST_CASE("shipped default config matches the built-in defaults") {
  const RunConfig c = load_config(std::filesystem::path(HICON_SOURCE_DIR) / "configs" / "default.json");
  CHECK(config_hash(c) == config_hash(RunConfig{}));
  CHECK(c.seed == 0x5EED);
}
