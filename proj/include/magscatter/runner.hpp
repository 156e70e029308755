#pragma once

#include "magscatter/report.hpp"

namespace magscatter {

inline constexpr const char* kVersion = "magscatter 0.1.0";

// Executes one experiment document. Deterministic for a fixed (config, seed)
// at a single thread; every pinned acceptance threshold lives here.
RunReport run_experiment(const ExperimentConfig& cfg);

struct VerifyEntry {
  std::string path;
  std::string experiment;
  std::vector<AcceptanceCheck> checks;
  bool pass = false;
  std::string error;  // nonempty when the run itself failed
};

// Runs every config in the list, emitting artifacts under out_root/<stem>/.
std::vector<VerifyEntry> verify_suite(const std::vector<std::string>& paths,
                                      const std::string& out_root, int jobs);

}  // namespace magscatter
