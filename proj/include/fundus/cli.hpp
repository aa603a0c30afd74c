#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fundus/raster.hpp"

namespace fundus::cli {

/// Exit codes shared by every subcommand.
enum Exit : int {
  kSuccess = 0,
  kFailure = 1,     // unreadable input or a processing error
  kIncomplete = 2,  // evaluation could not cover every sample
  kUsage = 64,
};

inline constexpr const char* kConfigEnv = "FUNDUS_FORGE_CONFIG";

/// Entry point behind the fundus-forge binary. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Vessel pixels (map >= threshold) blended halfway toward pure red; every
/// other pixel is copied unchanged. Throws ShapeMismatch.
RasterImage overlay(const RasterImage& photo, const ProbabilityMap& map, double threshold = 0.5);

}  // namespace fundus::cli
