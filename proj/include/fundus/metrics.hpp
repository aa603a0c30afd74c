#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "fundus/raster.hpp"

namespace fundus {

inline constexpr double kLossEpsilon = 1e-7;

struct LossValue {
  double total = 0.0;
  double dice_term = 0.0;
  double bce_term = 0.0;
};

/// Soft-Dice plus binary cross-entropy with equal weights:
///   dice = 1 - 2 sum(y p) / (sum(y + p) + eps)
///   bce  = -mean(y log p' + (1 - y) log(1 - p')),  p' = clamp(p, eps, 1 - eps)
/// Throws ShapeMismatch, OutOfRange (probabilities outside [0,1] or labels
/// outside {0,1}), NonFiniteValue.
LossValue loss(std::span<const std::uint8_t> y, std::span<const float> yhat, double epsilon = kLossEpsilon);
LossValue loss(const BinaryMask& y, const ProbabilityMap& yhat, double epsilon = kLossEpsilon);

/// 1 where yhat >= threshold. threshold must lie in (0, 1).
BinaryMask binarize(const ProbabilityMap& yhat, double threshold = 0.5);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Counts restricted to fov == 1 when a field-of-view mask is given.
ConfusionCounts confusion(const BinaryMask& y, const BinaryMask& pred, const BinaryMask* fov = nullptr);

struct OverlapScores {
  double dice = 1.0;
  double sensitivity = 1.0;
  double specificity = 1.0;
};

/// Any 0/0 ratio is reported as 1.0.
OverlapScores score(const ConfusionCounts& counts);

/// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie). Exact tie
/// accounting after a single sort. Throws DegenerateSingleClass.
double auc(std::span<const std::uint8_t> labels, std::span<const float> scores);
double auc(const BinaryMask& y, const ProbabilityMap& yhat, const BinaryMask* fov = nullptr);

struct ScoreSet {
  double dice = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  /// Absent when the evaluated region holds a single class.
  std::optional<double> auc;
};

enum class CiMode { Normal, StudentT };

struct AggregateScore {
  double mean = 0.0;
  double ci95 = 0.0;  // half-width
  std::size_t n = 0;
};

/// mean and z * s / sqrt(n) with the sample standard deviation (n - 1);
/// z = 1.96 or the two-sided 95% Student-t quantile for n - 1 degrees of
/// freedom. n == 1 gives ci95 = 0. Throws Precondition on an empty input.
AggregateScore aggregate(std::span<const double> values, CiMode mode = CiMode::Normal);

/// Two-sided 95% Student-t critical value.
double student_t_975(std::size_t degrees_of_freedom);

/// "mean (ci)" with three decimals, e.g. "0.757 (0.001)".
std::string format_cell(const AggregateScore& score);

std::string_view to_string(CiMode mode) noexcept;
CiMode ci_mode_from_string(std::string_view text);

}  // namespace fundus
