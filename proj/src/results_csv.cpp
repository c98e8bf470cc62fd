#include "rtv/results_csv.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "rtv/errors.hpp"

namespace rtv {

std::string format_g9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

std::string to_csv(std::span<const RobustnessRow> rows) {
  std::string out =
      "experiment,seed,method,noise_px,n_noisy_views,mpjpe_mm,skipped_points\n";
  for (const RobustnessRow& r : rows) {
    out += "robustness,";
    out += std::to_string(r.seed);
    out += ',';
    out += to_string(r.method);
    out += ',';
    out += format_g9(r.noise_px);
    out += ',';
    out += std::to_string(r.n_noisy_views);
    out += ',';
    out += format_g9(r.mpjpe_mm);
    out += ',';
    out += std::to_string(r.skipped_points);
    out += '\n';
  }
  return out;
}

std::string to_csv(std::span<const StabilityRow> rows) {
  std::string out = "experiment,seed,alpha,step,loss,mpjpe_mm,center_drift_px\n";
  for (const StabilityRow& r : rows) {
    out += "stability,";
    out += std::to_string(r.seed);
    out += ',';
    out += format_g9(r.alpha);
    out += ',';
    out += std::to_string(r.step);
    out += ',';
    out += format_g9(r.loss);
    out += ',';
    out += format_g9(r.mpjpe_mm);
    out += ',';
    out += format_g9(r.center_drift_px);
    out += '\n';
  }
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace rtv
