#include "fundus/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>
#include <vector>

namespace fundus {
namespace {

void check_same_shape(Size a, Size b, const char* what) {
  if (a != b)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": " + std::to_string(a.width) + "x" +
                                              std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                              std::to_string(b.height));
}

double ratio_or_one(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

LossValue loss(std::span<const std::uint8_t> y, std::span<const float> yhat, double epsilon) {
  if (y.size() != yhat.size())
    throw Error(ErrorCode::ShapeMismatch, "label and prediction lengths differ");
  if (y.empty()) throw Error(ErrorCode::Precondition, "loss of an empty input");

  double intersection = 0.0, mass = 0.0, log_likelihood = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = yhat[i];
    if (!std::isfinite(p)) throw Error(ErrorCode::NonFiniteValue, "prediction is NaN/Inf");
    if (p < 0.0 || p > 1.0) throw Error(ErrorCode::OutOfRange, "prediction outside [0,1]");
    if (y[i] > 1) throw Error(ErrorCode::OutOfRange, "label outside {0,1}");
    const double t = y[i];
    intersection += t * p;
    mass += t + p;
    const double clamped = std::clamp(p, epsilon, 1.0 - epsilon);
    log_likelihood += t * std::log(clamped) + (1.0 - t) * std::log(1.0 - clamped);
  }
  LossValue out;
  out.dice_term = 1.0 - (2.0 * intersection) / (mass + epsilon);
  out.bce_term = -log_likelihood / static_cast<double>(y.size());
  out.total = out.dice_term + out.bce_term;
  return out;
}

LossValue loss(const BinaryMask& y, const ProbabilityMap& yhat, double epsilon) {
  check_same_shape(y.size(), yhat.size(), "loss");
  return loss(y.data(), yhat.data(), epsilon);
}

BinaryMask binarize(const ProbabilityMap& yhat, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::Precondition, "threshold must lie in (0,1)");
  BinaryMask out(yhat.width(), yhat.height());
  auto src = yhat.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<double>(src[i]) >= threshold ? 1 : 0;
  return out;
}

ConfusionCounts confusion(const BinaryMask& y, const BinaryMask& pred, const BinaryMask* fov) {
  check_same_shape(y.size(), pred.size(), "confusion");
  if (fov) check_same_shape(y.size(), fov->size(), "confusion fov");
  ConfusionCounts c;
  auto truth = y.data();
  auto guess = pred.data();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (fov && !fov->data()[i]) continue;
    if (truth[i]) {
      guess[i] ? ++c.tp : ++c.fn;
    } else {
      guess[i] ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

OverlapScores score(const ConfusionCounts& c) {
  return {ratio_or_one(2 * c.tp, 2 * c.tp + c.fp + c.fn), ratio_or_one(c.tp, c.tp + c.fn),
          ratio_or_one(c.tn, c.tn + c.fp)};
}

double auc(std::span<const std::uint8_t> labels, std::span<const float> scores) {
  if (labels.size() != scores.size()) throw Error(ErrorCode::ShapeMismatch, "label and score lengths differ");
  std::vector<std::pair<float, std::uint8_t>> ranked(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::isnan(scores[i])) throw Error(ErrorCode::NonFiniteValue, "score is NaN");
    ranked[i] = {scores[i], labels[i] ? std::uint8_t{1} : std::uint8_t{0}};
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  // Twice the Mann-Whitney U statistic, kept integral so ties are exact.
  std::uint64_t twice_u = 0, negatives_below = 0, positives = 0, negatives = 0;
  for (std::size_t i = 0; i < ranked.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < ranked.size() && ranked[j].first == ranked[i].first) {
      ranked[j].second ? ++pos : ++neg;
      ++j;
    }
    twice_u += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    positives += pos;
    negatives += neg;
    i = j;
  }
  if (positives == 0 || negatives == 0)
    throw Error(ErrorCode::DegenerateSingleClass, "AUC needs at least one positive and one negative sample");
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double auc(const BinaryMask& y, const ProbabilityMap& yhat, const BinaryMask* fov) {
  check_same_shape(y.size(), yhat.size(), "auc");
  if (!fov) return auc(y.data(), yhat.data());
  check_same_shape(y.size(), fov->size(), "auc fov");
  std::vector<std::uint8_t> labels;
  std::vector<float> scores;
  for (std::size_t i = 0; i < y.pixel_count(); ++i) {
    if (!fov->data()[i]) continue;
    labels.push_back(y.data()[i]);
    scores.push_back(yhat.data()[i]);
  }
  return auc(labels, scores);
}

double student_t_975(std::size_t df) {
  static constexpr std::array<double, 30> table = {
      12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004, 2.262157, 2.228139,
      2.200985,  2.178813, 2.160369, 2.144787, 2.131450, 2.119905, 2.109816, 2.100922, 2.093024, 2.085963,
      2.079614,  2.073873, 2.068658, 2.063899, 2.059539, 2.055529, 2.051831, 2.048407, 2.045230, 2.042272};
  if (df == 0) throw Error(ErrorCode::Precondition, "Student-t needs at least one degree of freedom");
  if (df <= table.size()) return table[df - 1];
  // Cornish-Fisher expansion around the normal quantile.
  const double z = 1.959963984540054;
  const double d = static_cast<double>(df);
  const double g1 = (z * z * z + z) / 4.0;
  const double g2 = (5 * std::pow(z, 5) + 16 * std::pow(z, 3) + 3 * z) / 96.0;
  const double g3 = (3 * std::pow(z, 7) + 19 * std::pow(z, 5) + 17 * std::pow(z, 3) - 15 * z) / 384.0;
  return z + g1 / d + g2 / (d * d) + g3 / (d * d * d);
}

AggregateScore aggregate(std::span<const double> values, CiMode mode) {
  if (values.empty()) throw Error(ErrorCode::Precondition, "aggregate of no values");
  const std::size_t n = values.size();
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0, 1};
  double squares = 0.0;
  for (double v : values) squares += (v - mean) * (v - mean);
  const double sd = std::sqrt(squares / static_cast<double>(n - 1));
  const double z = mode == CiMode::Normal ? 1.96 : student_t_975(n - 1);
  return {mean, z * sd / std::sqrt(static_cast<double>(n)), n};
}

std::string format_cell(const AggregateScore& s) {
  char buffer[64];
  // +0.0 folds a negative zero from rounding into "0.000".
  std::snprintf(buffer, sizeof buffer, "%.3f (%.3f)", s.mean + 0.0, s.ci95 + 0.0);
  return buffer;
}

std::string_view to_string(CiMode mode) noexcept { return mode == CiMode::Normal ? "normal" : "student-t"; }

CiMode ci_mode_from_string(std::string_view text) {
  if (text == "normal") return CiMode::Normal;
  if (text == "student-t") return CiMode::StudentT;
  throw Error(ErrorCode::InvalidConfig, "ci mode must be 'normal' or 'student-t', got '" + std::string(text) + "'");
}

}  // namespace fundus
