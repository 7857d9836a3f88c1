// Runs every experiment at the default configuration and reports one line per
// acceptance criterion. Exit status is nonzero iff some criterion fails.
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "hicon/experiments.hpp"

using namespace hicon::exp;

namespace {

struct Criterion {
  int id;
  const char* title;
  std::string experiment;
  std::function<bool(const Check&)> select;
};

bool contains(const std::string& s, const char* needle) { return s.find(needle) != std::string::npos; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance_out";
  RunConfig cfg;
  cfg.experiments = experiment_names();

  const RunSummary first = run(cfg, out / "run1");

  auto all = [](const Check&) { return true; };
  auto hom_rate = [](const Check& c) { return contains(c.name, "slope") || contains(c.name, "decreasing"); };
  auto hom_sa = [](const Check& c) { return contains(c.name, "R_hom(z)*") || contains(c.name, "pseudoresolvent"); };
  const std::vector<Criterion> criteria = {
      {1, "Krein resolvent vs direct solve", "oracle", all},
      {2, "boundary triple identities and Green identity", "identities", all},
      {3, "Steklov ground states and disc oracle", "steklov", all},
      {4, "M-inverse block asymptotics", "mslope", all},
      {5, "homogenized resolvent O(eps^2) rate", "homslope", hom_rate},
      {6, "self-adjointness of the homogenized resolvent", "homslope", hom_sa},
      {7, "dispersion functions", "dispersion", all},
      {8, "corrector expansion of the stiff-ls Steklov eigenvalue", "correctors", all},
      {9, "fibre rescaling", "rescale", all},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    const ExperimentResult* res = nullptr;
    for (const auto& r : first.results)
      if (r.name == cr.experiment) res = &r;
    int n = 0, fails = 0, devs = 0;
    std::vector<const Check*> notes;
    if (res)
      for (const auto& c : res->checks) {
        if (!cr.select(c)) continue;
        ++n;
        if (!c.passed) {
          (c.known_deviation ? devs : fails) += 1;
          notes.push_back(&c);
        }
      }
    const char* tag = (!res || n == 0 || fails) ? "FAIL" : (devs ? "DEVIATION" : "PASS");
    if (std::string(tag) == "FAIL") ++failed;
    std::printf("[%s] %d. %s (%d checks, %d failed, %d known deviations)\n", tag, cr.id, cr.title, n, fails, devs);
    for (const Check* c : notes)
      std::printf("    %s %s: value=%.6e threshold=%.6e %s\n", c->known_deviation ? "deviation" : "failed",
                  c->name.c_str(), c->value, c->threshold, c->detail.c_str());
  }

  // 10: a second run must reproduce every CSV byte for byte.
  run(cfg, out / "run2");
  int differ = 0;
  for (const auto& name : cfg.experiments) {
    const std::string a = slurp(out / "run1" / (name + ".csv"));
    const std::string b = slurp(out / "run2" / (name + ".csv"));
    if (a.empty() || a != b) {
      ++differ;
      std::printf("    differs: %s.csv\n", name.c_str());
    }
  }
  std::printf("[%s] 10. deterministic CSV reports (%zu files, %d differ)\n", differ ? "FAIL" : "PASS",
              cfg.experiments.size(), differ);
  if (differ) ++failed;

  std::printf("%s: %d of 10 criteria failed\n", failed ? "FAILED" : "OK", failed);
  return failed ? 1 : 0;
}
