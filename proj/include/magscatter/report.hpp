#pragma once

#include <string>
#include <vector>

#include "magscatter/config.hpp"
#include "magscatter/trace.hpp"

namespace magscatter {

struct AcceptanceCheck {
  std::string id;           // acceptance criterion identifier, e.g. "c03"
  std::string description;
  double observed = 0.0;
  std::string constraint;   // the pinned threshold, human readable
  bool pass = false;
};

struct RunReport {
  std::string experiment;
  ExperimentConfig config;  // echo of the input document
  std::vector<NormTrace> traces;
  std::vector<std::pair<std::string, RateFit>> fits;
  std::vector<AcceptanceCheck> checks;
  double wall_clock_seconds = 0.0;
  std::string version;

  bool all_pass() const;
};

// traces.csv   columns: trace,t,value
// fits.csv     columns: trace,exponent,log_amplitude,r_squared,t_min,t_max
// report.json  full report (deterministic; timing goes to timing.txt so
//              repeated runs are byte-identical)
// plot.svg     log-log polylines with fitted lines overlaid
void emit_report(const RunReport& report, const std::string& out_dir,
                 const std::vector<std::string>& formats = {"csv", "svg",
                                                            "json"});

std::string traces_to_csv(const RunReport& report);
std::string fits_to_csv(const RunReport& report);
std::string report_to_json(const RunReport& report);
std::string report_to_svg(const RunReport& report);

}  // namespace magscatter
