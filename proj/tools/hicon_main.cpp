#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "hicon/experiments.hpp"

namespace {

int report(const hicon::exp::RunSummary& s) {
  for (const auto& r : s.results)
    for (const auto& c : r.checks) {
      const char* tag = c.passed ? "PASS" : (c.known_deviation ? "DEVIATION" : "FAIL");
      std::printf("[%s] %s: %s  value=%.6e threshold=%.6e%s%s\n", tag, r.name.c_str(), c.name.c_str(), c.value,
                  c.threshold, c.detail.empty() ? "" : "  ", c.detail.c_str());
    }
  if (!s.passed) std::printf("first failure: %s\n", s.first_failure.c_str());
  return s.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hicon: high-contrast periodic composite experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output_dir in the config)");

  std::vector<std::string> selected;
  for (const auto& name : hicon::exp::experiment_names())
    app.add_subcommand(name, "run the '" + name + "' experiment")->callback([&selected, name] {
      selected = {name};
    });
  app.add_subcommand("all", "run every experiment")->callback([&selected] {
    selected = hicon::exp::experiment_names();
  });

  CLI11_PARSE(app, argc, argv);

  try {
    hicon::exp::RunConfig cfg = config_path.empty() ? hicon::exp::RunConfig{} : hicon::exp::load_config(config_path);
    cfg.experiments = selected;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    return report(hicon::exp::run(cfg, cfg.output_dir));
  } catch (const hicon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
