#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fundus/datasets.hpp"
#include "fundus/metrics.hpp"

namespace fundus {

enum class Pooling {
  PerImage,  // mean of per-image scores within a fold
  Pooled,    // one confusion table / ROC over all pixels of a fold
};

std::string_view to_string(Pooling pooling) noexcept;
Pooling pooling_from_string(std::string_view text);

struct EvalOptions {
  double threshold = 0.5;
  /// Restrict scoring to the field of view (dataset mask, else the locator mask).
  bool use_fov = true;
  CiMode ci = CiMode::Normal;
  Pooling pooling = Pooling::PerImage;
  int standard_size = 1024;
  std::uint64_t fold_seed = 42;  // recorded in the report only
  int jobs = 1;
};

struct ImageScore {
  int fold = 0;
  std::string id;
  ScoreSet scores;
};

struct FoldScore {
  int fold = 0;
  ScoreSet scores;
};

struct MetricsReport {
  std::string dataset;
  std::string observer;
  EvalOptions options;
  std::vector<ImageScore> images;  // fold-major, then sorted id
  std::vector<FoldScore> folds;
  AggregateScore dice, sensitivity, specificity;
  std::optional<AggregateScore> auc;

  /// e.g. "DRIVE (1stHO)"
  std::string row_label() const;
};

/// Prediction folders: either <pred_dir>/fold_<k>/<id>.pfm for each fold
/// model, or <pred_dir>/<id>.pfm for a single model. A prediction may be in
/// standardized space (standard_size square) or in the photo's own
/// resolution; labels are brought into the matching space.
/// Throws MissingPrediction listing every absent file, ShapeMismatch, and
/// LayoutMismatch when no test sample carries the observer's labels.
MetricsReport evaluate_model(const std::filesystem::path& pred_dir, const std::vector<Sample>& samples,
                             const std::string& observer, const EvalOptions& options = {});

nlohmann::json to_json(const MetricsReport& report);
/// Aligned table with one row in "mean (ci)" cells.
std::string render_table(const std::vector<MetricsReport>& reports);

}  // namespace fundus
