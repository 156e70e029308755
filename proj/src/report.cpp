#include "magscatter/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace magscatter {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace

bool RunReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string traces_to_csv(const RunReport& report) {
  std::string out = "trace,t,value\n";
  for (const auto& trace : report.traces)
    for (const auto& [t, v] : trace.samples)
      out += trace.name + "," + fmt_double(t) + "," + fmt_double(v) + "\n";
  return out;
}

std::string fits_to_csv(const RunReport& report) {
  std::string out = "trace,exponent,log_amplitude,r_squared,t_min,t_max\n";
  for (const auto& [name, fit] : report.fits)
    out += name + "," + fmt_double(fit.exponent) + "," +
           fmt_double(fit.log_amplitude) + "," + fmt_double(fit.r_squared) +
           "," + fmt_double(fit.t_min) + "," + fmt_double(fit.t_max) + "\n";
  return out;
}

std::string report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["version"] = report.version;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config.entries()) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json traces = nlohmann::ordered_json::array();
  for (const auto& trace : report.traces) {
    nlohmann::ordered_json tj;
    tj["name"] = trace.name;
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (const auto& [t, v] : trace.samples)
      samples.push_back({{"t", t}, {"value", v}});
    tj["samples"] = samples;
    traces.push_back(tj);
  }
  j["traces"] = traces;
  nlohmann::ordered_json fits = nlohmann::ordered_json::array();
  for (const auto& [name, fit] : report.fits)
    fits.push_back({{"trace", name},
                    {"exponent", fit.exponent},
                    {"log_amplitude", fit.log_amplitude},
                    {"r_squared", fit.r_squared},
                    {"t_min", fit.t_min},
                    {"t_max", fit.t_max}});
  j["fits"] = fits;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"id", c.id},
                      {"description", c.description},
                      {"observed", c.observed},
                      {"constraint", c.constraint},
                      {"pass", c.pass}});
  j["checks"] = checks;
  j["pass"] = report.all_pass();
  return j.dump(2) + "\n";
}

namespace {

struct PlotRange {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string report_to_svg(const RunReport& report) {
  // log-log plot of all positive samples; fitted lines dashed.
  const double W = 860, H = 600, ml = 70, mr = 200, mt = 40, mb = 50;
  PlotRange r;
  bool any = false;
  for (const auto& trace : report.traces)
    for (const auto& [t, v] : trace.samples) {
      if (!(t > 0.0) || !(v > 0.0)) continue;
      const double lx = std::log10(t), ly = std::log10(v);
      if (!any) {
        r = PlotRange{lx, lx, ly, ly};
        any = true;
      } else {
        r.x0 = std::min(r.x0, lx);
        r.x1 = std::max(r.x1, lx);
        r.y0 = std::min(r.y0, ly);
        r.y1 = std::max(r.y1, ly);
      }
    }
  if (!any) r = PlotRange{0, 1, 0, 1};
  if (r.x1 - r.x0 < 1e-12) r.x1 = r.x0 + 1.0;
  if (r.y1 - r.y0 < 1e-12) r.y1 = r.y0 + 1.0;

  auto px = [&](double lx) {
    return ml + (lx - r.x0) / (r.x1 - r.x0) * (W - ml - mr);
  };
  auto py = [&](double ly) {
    return H - mb - (ly - r.y0) / (r.y1 - r.y0) * (H - mt - mb);
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_double(W) +
       "\" height=\"" + fmt_double(H) + "\" viewBox=\"0 0 " + fmt_double(W) +
       " " + fmt_double(H) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<rect x=\"" + fmt_double(ml) + "\" y=\"" + fmt_double(mt) +
       "\" width=\"" + fmt_double(W - ml - mr) + "\" height=\"" +
       fmt_double(H - mt - mb) +
       "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  s += "<text x=\"" + fmt_double(0.5 * W) + "\" y=\"20\" font-size=\"15\" "
       "text-anchor=\"middle\" font-family=\"monospace\">" +
       report.experiment + "</text>\n";
  s += "<text x=\"" + fmt_double(0.5 * W) + "\" y=\"" + fmt_double(H - 12) +
       "\" font-size=\"12\" text-anchor=\"middle\" "
       "font-family=\"monospace\">log10 t</text>\n";

  int color = 0, legend_row = 0;
  for (const auto& trace : report.traces) {
    const char* col = kPalette[color % 8];
    std::string pts;
    for (const auto& [t, v] : trace.samples) {
      if (!(t > 0.0) || !(v > 0.0)) continue;
      pts += fmt_double(px(std::log10(t))) + "," +
             fmt_double(py(std::log10(v))) + " ";
    }
    if (!pts.empty())
      s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + col +
           "\" stroke-width=\"1.5\"/>\n";
    s += "<text x=\"" + fmt_double(W - mr + 12) + "\" y=\"" +
         fmt_double(mt + 16 + 16 * legend_row) +
         "\" font-size=\"11\" font-family=\"monospace\" fill=\"" + col +
         "\">" + trace.name + "</text>\n";
    ++color;
    ++legend_row;
  }
  color = 0;
  for (const auto& [name, fit] : report.fits) {
    const char* col = kPalette[color % 8];
    const double lx0 = std::log10(fit.t_min), lx1 = std::log10(fit.t_max);
    const double ly0 = (fit.log_amplitude + fit.exponent * std::log(fit.t_min)) /
                       std::log(10.0);
    const double ly1 = (fit.log_amplitude + fit.exponent * std::log(fit.t_max)) /
                       std::log(10.0);
    s += "<line x1=\"" + fmt_double(px(lx0)) + "\" y1=\"" +
         fmt_double(py(ly0)) + "\" x2=\"" + fmt_double(px(lx1)) + "\" y2=\"" +
         fmt_double(py(ly1)) + "\" stroke=\"" + col +
         "\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>\n";
    s += "<text x=\"" + fmt_double(W - mr + 12) + "\" y=\"" +
         fmt_double(mt + 16 + 16 * legend_row) +
         "\" font-size=\"11\" font-family=\"monospace\" fill=\"" + col +
         "\">fit " + name + ": t^" + fmt_double(fit.exponent) + "</text>\n";
    ++color;
    ++legend_row;
  }
  s += "</svg>\n";
  return s;
}

void emit_report(const RunReport& report, const std::string& out_dir,
                 const std::vector<std::string>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);
  for (const auto& fmt : formats) {
    if (fmt == "csv") {
      write_file(out_dir + "/traces.csv", traces_to_csv(report));
      write_file(out_dir + "/fits.csv", fits_to_csv(report));
    } else if (fmt == "json") {
      write_file(out_dir + "/report.json", report_to_json(report));
    } else if (fmt == "svg") {
      write_file(out_dir + "/plot.svg", report_to_svg(report));
    } else {
      throw ConfigError("unknown emit format '" + fmt + "'");
    }
  }
  // Timing is volatile; kept out of report.json so reruns are byte-identical.
  write_file(out_dir + "/timing.txt",
             fmt_double(report.wall_clock_seconds) + " s\n");
}

}  // namespace magscatter
