#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fundus/augment.hpp"
#include "fundus/evaluate.hpp"
#include "fundus/standardizer.hpp"

namespace fundus {

struct MetricsConfig {
  double threshold = 0.5;
  bool fov = true;
  CiMode ci = CiMode::Normal;
  Pooling pooling = Pooling::PerImage;
};

struct SplitConfig {
  int k = 5;
  std::uint64_t seed = 42;
};

/// Everything a run depends on besides its inputs. Serialized as TOML:
///
///   [clahe]    clip_limit, tiles_x, tiles_y, before_resize
///   [resize]   size
///   [augment]  seed, rotate, flip, brightness, contrast, flip_probability,
///              brightness_max_delta, contrast_min, contrast_max
///   [metrics]  threshold, fov, ci ("normal" | "student-t"),
///              pooling ("per-image" | "pooled")
///   [split]    k, seed
struct PipelineConfig {
  ClaheParams clahe;
  bool clahe_before_resize = true;
  int resize = kStandardSize;
  AugmentConfig augment;
  MetricsConfig metrics;
  SplitConfig split;

  StandardizeOptions standardize_options() const;
  EvalOptions eval_options(int jobs = 1) const;

  friend bool operator==(const PipelineConfig& a, const PipelineConfig& b);
};

/// Throws InvalidConfig on syntax errors, unknown tables/keys, type
/// mismatches and out-of-range values. Missing keys keep their defaults.
PipelineConfig parse_config(std::string_view toml);
PipelineConfig load_config(const std::filesystem::path& path);

/// Every key, in a fixed order; parse_config(to_toml(c)) == c.
std::string to_toml(const PipelineConfig& config);

/// Applies one "table.key=value" override. The value uses TOML literal
/// syntax; string keys also accept a bare word.
void apply_override(PipelineConfig& config, std::string_view assignment);

/// Throws InvalidConfig describing the first violated constraint.
void validate(const PipelineConfig& config);

}  // namespace fundus
