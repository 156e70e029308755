#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "magscatter/runner.hpp"

namespace {

int thread_cap() {
  if (const char* env = std::getenv("MAGSCATTER_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magscatter: dispersive decay and wave-operator experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", suite_dir;
  int jobs = 1;
  long seed = -1;

  auto* run = app.add_subcommand("run", "run a single experiment config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "unused for single runs");
  run->add_option("--seed", seed, "override the config seed");

  auto* verify = app.add_subcommand(
      "verify", "run every config in a directory and print a pass/fail table");
  verify->add_option("suite", suite_dir, "directory of *.cfg files")->required();
  verify->add_option("--out", out_dir, "output root directory");
  verify->add_option("--jobs", jobs, "concurrent configs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      magscatter::ExperimentConfig cfg =
          magscatter::ExperimentConfig::load(config_path);
      if (seed >= 0) cfg.set("seed", std::to_string(seed));
      magscatter::RunReport rep = magscatter::run_experiment(cfg);
      magscatter::emit_report(rep, out_dir);
      for (const auto& c : rep.checks)
        std::printf("%-4s %-4s %-55s observed=%.6g  (%s)\n",
                    c.pass ? "PASS" : "FAIL", c.id.c_str(),
                    c.description.c_str(), c.observed, c.constraint.c_str());
      std::printf("%s: %s -> %s\n", rep.all_pass() ? "ok" : "FAILED",
                  config_path.c_str(), out_dir.c_str());
      return rep.all_pass() ? 0 : 1;
    }

    // verify
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(suite_dir))
      if (entry.path().extension() == ".cfg")
        paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) {
      std::fprintf(stderr, "error: no .cfg files in %s\n", suite_dir.c_str());
      return 2;
    }
    jobs = std::min(jobs, thread_cap());
    auto entries = magscatter::verify_suite(paths, out_dir, jobs);
    bool all = true;
    for (const auto& e : entries) {
      if (!e.error.empty()) {
        std::printf("FAIL %-40s error: %s\n",
                    std::filesystem::path(e.path).filename().c_str(),
                    e.error.c_str());
        all = false;
        continue;
      }
      std::printf("%s %-40s %s\n", e.pass ? "PASS" : "FAIL",
                  std::filesystem::path(e.path).filename().c_str(),
                  e.experiment.c_str());
      for (const auto& c : e.checks)
        std::printf("     %-4s %-4s %-55s observed=%.6g (%s)\n",
                    c.pass ? "pass" : "FAIL", c.id.c_str(),
                    c.description.c_str(), c.observed, c.constraint.c_str());
      all &= e.pass;
    }
    std::printf("suite: %s\n", all ? "PASS" : "FAIL");
    return all ? 0 : 1;
  } catch (const magscatter::ConfigError& e) {
    std::fprintf(stderr, "error: kind=ConfigError msg=%s\n", e.what());
    return 2;
  } catch (const magscatter::Error& e) {
    std::fprintf(stderr, "error: kind=%s msg=%s\n", e.kind().c_str(), e.what());
    return 3;
  }
}
