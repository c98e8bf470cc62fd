#pragma once

#include <span>
#include <string>

#include "rtv/sim.hpp"

namespace rtv {

/// Shortest stable float form used in all CSV output: %.9g.
std::string format_g9(double x);

/// header: experiment,seed,method,noise_px,n_noisy_views,mpjpe_mm,skipped_points
std::string to_csv(std::span<const RobustnessRow> rows);

/// header: experiment,seed,alpha,step,loss,mpjpe_mm,center_drift_px
std::string to_csv(std::span<const StabilityRow> rows);

/// Writes to a file, or to stdout when path is "-".
void write_output(const std::string& path, const std::string& content);

}  // namespace rtv
