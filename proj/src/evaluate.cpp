#include "fundus/evaluate.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "fundus/locator.hpp"
#include "fundus/parallel.hpp"
#include "fundus/raster_io.hpp"
#include "fundus/standardizer.hpp"

namespace fundus {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct PredictionFold {
  int index = 0;
  fs::path dir;
};

std::vector<PredictionFold> prediction_folds(const fs::path& pred_dir) {
  if (!fs::is_directory(pred_dir)) throw Error(ErrorCode::MissingPrediction, "prediction directory not found: " + pred_dir.string());
  std::vector<PredictionFold> folds;
  const std::regex pattern(R"(fold_(\d+))");
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && std::regex_match(name, m, pattern)) folds.push_back({std::stoi(m[1].str()), entry.path()});
  }
  std::sort(folds.begin(), folds.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  if (folds.empty()) folds.push_back({0, pred_dir});
  return folds;
}

struct Reference {
  BinaryMask label;
  std::optional<BinaryMask> fov;
};

Reference build_reference(const Sample& sample, const std::string& observer, Size prediction_size,
                          const EvalOptions& options) {
  Reference ref;
  const BinaryMask raw_label = read_mask(sample.labels.at(observer));
  if (prediction_size == raw_label.size()) {
    ref.label = raw_label;
    if (options.use_fov) ref.fov = sample.fov ? read_mask(*sample.fov) : retina_mask(read_rgb(sample.image));
  } else if (prediction_size == Size{options.standard_size, options.standard_size}) {
    const RasterImage photo = read_rgb(sample.image);
    const BoundingBox bbox = locate_retina(photo);
    ref.label = standardize_label(raw_label, bbox, photo.size(), options.standard_size);
    if (options.use_fov) {
      const BinaryMask raw_fov = sample.fov ? read_mask(*sample.fov) : retina_mask(photo);
      ref.fov = standardize_label(raw_fov, bbox, photo.size(), options.standard_size);
    }
  } else {
    throw Error(ErrorCode::ShapeMismatch,
                "prediction for " + sample.id + " is " + std::to_string(prediction_size.width) + "x" +
                    std::to_string(prediction_size.height) + "; expected the photo's " +
                    std::to_string(raw_label.width()) + "x" + std::to_string(raw_label.height()) + " or " +
                    std::to_string(options.standard_size) + "x" + std::to_string(options.standard_size));
  }
  return ref;
}

void check_prediction(const ProbabilityMap& map, const Reference& ref, const std::string& id) {
  if (map.size() != ref.label.size())
    throw Error(ErrorCode::ShapeMismatch, "prediction for " + id + " changes shape between folds");
}

ScoreSet score_image(const Reference& ref, const ProbabilityMap& prediction, const EvalOptions& options) {
  const BinaryMask* fov = ref.fov ? &*ref.fov : nullptr;
  const auto overlap = score(confusion(ref.label, binarize(prediction, options.threshold), fov));
  ScoreSet s{overlap.dice, overlap.sensitivity, overlap.specificity, std::nullopt};
  try {
    s.auc = auc(ref.label, prediction, fov);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSingleClass) throw;
  }
  return s;
}

ScoreSet mean_scores(const std::vector<ScoreSet>& sets) {
  ScoreSet mean;
  double auc_sum = 0.0;
  std::size_t auc_count = 0;
  for (const auto& s : sets) {
    mean.dice += s.dice;
    mean.sensitivity += s.sensitivity;
    mean.specificity += s.specificity;
    if (s.auc) auc_sum += *s.auc, ++auc_count;
  }
  const double n = static_cast<double>(sets.size());
  mean.dice /= n;
  mean.sensitivity /= n;
  mean.specificity /= n;
  if (auc_count) mean.auc = auc_sum / static_cast<double>(auc_count);
  return mean;
}

json aggregate_json(const AggregateScore& a) { return {{"mean", a.mean}, {"ci95", a.ci95}, {"n", a.n}, {"cell", format_cell(a)}}; }

json scores_json(const ScoreSet& s) {
  return {{"dice", s.dice},
          {"sensitivity", s.sensitivity},
          {"specificity", s.specificity},
          {"auc", s.auc ? json(*s.auc) : json(nullptr)}};
}

}  // namespace

std::string_view to_string(Pooling pooling) noexcept { return pooling == Pooling::PerImage ? "per-image" : "pooled"; }

Pooling pooling_from_string(std::string_view text) {
  if (text == "per-image") return Pooling::PerImage;
  if (text == "pooled") return Pooling::Pooled;
  throw Error(ErrorCode::InvalidConfig, "pooling must be 'per-image' or 'pooled', got '" + std::string(text) + "'");
}

std::string MetricsReport::row_label() const { return dataset + " (" + observer + ")"; }

MetricsReport evaluate_model(const fs::path& pred_dir, const std::vector<Sample>& samples, const std::string& observer,
                             const EvalOptions& options) {
  std::vector<const Sample*> evaluated;
  for (const auto& s : samples)
    if (s.split == Split::Test && s.labels.contains(observer)) evaluated.push_back(&s);
  std::sort(evaluated.begin(), evaluated.end(), [](const Sample* a, const Sample* b) { return a->id < b->id; });
  if (evaluated.empty()) throw Error(ErrorCode::LayoutMismatch, "no test samples carry labels from observer '" + observer + "'");

  const auto folds = prediction_folds(pred_dir);
  std::vector<std::string> missing;
  for (const auto& fold : folds)
    for (const Sample* s : evaluated)
      if (!fs::is_regular_file(fold.dir / (s->id + ".pfm"))) missing.push_back((fold.dir / (s->id + ".pfm")).string());
  if (!missing.empty()) {
    std::string message = std::to_string(missing.size()) + " prediction(s) missing:";
    for (const auto& m : missing) message += "\n  " + m;
    throw Error(ErrorCode::MissingPrediction, message);
  }

  const std::size_t n = evaluated.size();
  auto prediction_path = [&](std::size_t fold, std::size_t i) { return folds[fold].dir / (evaluated[i]->id + ".pfm"); };

  // Worker exceptions are parked per slot and rethrown in id order.
  std::vector<std::optional<Reference>> refs(n);
  std::vector<std::string> errors(n);
  std::vector<ErrorCode> error_codes(n, ErrorCode::IoError);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    try {
      const auto first = read_pfm(prediction_path(0, i));
      refs[i] = build_reference(*evaluated[i], observer, first.size(), options);
    } catch (const Error& e) {
      errors[i] = e.detail();
      error_codes[i] = e.code();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  auto rethrow_first = [&] {
    for (std::size_t i = 0; i < n; ++i)
      if (!errors[i].empty()) throw Error(error_codes[i], evaluated[i]->id + ": " + errors[i]);
  };
  rethrow_first();

  MetricsReport report;
  report.dataset = std::string(to_string(evaluated.front()->dataset));
  report.observer = observer;
  report.options = options;

  std::vector<double> dice, sens, spec, aucs;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<ScoreSet> per_image(n);
    std::vector<ConfusionCounts> counts(n);
    std::vector<std::vector<std::uint8_t>> pooled_labels(options.pooling == Pooling::Pooled ? n : 0);
    std::vector<std::vector<float>> pooled_scores(pooled_labels.size());

    parallel_for(n, options.jobs, [&](std::size_t i) {
      try {
        const auto prediction = read_pfm(prediction_path(f, i));
        const Reference& ref = *refs[i];
        check_prediction(prediction, ref, evaluated[i]->id);
        per_image[i] = score_image(ref, prediction, options);
        if (options.pooling == Pooling::Pooled) {
          const BinaryMask* fov = ref.fov ? &*ref.fov : nullptr;
          counts[i] = confusion(ref.label, binarize(prediction, options.threshold), fov);
          for (std::size_t p = 0; p < ref.label.pixel_count(); ++p) {
            if (fov && !fov->data()[p]) continue;
            pooled_labels[i].push_back(ref.label.data()[p]);
            pooled_scores[i].push_back(prediction.data()[p]);
          }
        }
      } catch (const Error& e) {
        errors[i] = e.detail();
        error_codes[i] = e.code();
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    rethrow_first();

    for (std::size_t i = 0; i < n; ++i) report.images.push_back({folds[f].index, evaluated[i]->id, per_image[i]});

    ScoreSet fold_scores;
    if (options.pooling == Pooling::PerImage) {
      fold_scores = mean_scores(per_image);
    } else {
      ConfusionCounts total;
      std::vector<std::uint8_t> labels;
      std::vector<float> scores;
      for (std::size_t i = 0; i < n; ++i) {
        total += counts[i];
        labels.insert(labels.end(), pooled_labels[i].begin(), pooled_labels[i].end());
        scores.insert(scores.end(), pooled_scores[i].begin(), pooled_scores[i].end());
        pooled_labels[i] = {};
        pooled_scores[i] = {};
      }
      const auto overlap = score(total);
      fold_scores = {overlap.dice, overlap.sensitivity, overlap.specificity, std::nullopt};
      try {
        fold_scores.auc = auc(labels, scores);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateSingleClass) throw;
      }
    }
    report.folds.push_back({folds[f].index, fold_scores});
    dice.push_back(fold_scores.dice);
    sens.push_back(fold_scores.sensitivity);
    spec.push_back(fold_scores.specificity);
    if (fold_scores.auc) aucs.push_back(*fold_scores.auc);
  }

  report.dice = aggregate(dice, options.ci);
  report.sensitivity = aggregate(sens, options.ci);
  report.specificity = aggregate(spec, options.ci);
  if (!aucs.empty()) report.auc = aggregate(aucs, options.ci);
  return report;
}

json to_json(const MetricsReport& report) {
  json images = json::array();
  for (const auto& img : report.images) {
    json j = scores_json(img.scores);
    j["fold"] = img.fold;
    j["id"] = img.id;
    images.push_back(j);
  }
  json folds = json::array();
  for (const auto& fold : report.folds) {
    json j = scores_json(fold.scores);
    j["fold"] = fold.fold;
    folds.push_back(j);
  }
  return {{"dataset", report.dataset},
          {"observer", report.observer},
          {"row", report.row_label()},
          {"options",
           {{"threshold", report.options.threshold},
            {"fov", report.options.use_fov ? "fov" : "full"},
            {"ci", to_string(report.options.ci)},
            {"pooling", to_string(report.options.pooling)},
            {"standard_size", report.options.standard_size},
            {"fold_seed", report.options.fold_seed}}},
          {"aggregate",
           {{"dice", aggregate_json(report.dice)},
            {"sensitivity", aggregate_json(report.sensitivity)},
            {"specificity", aggregate_json(report.specificity)},
            {"auc", report.auc ? aggregate_json(*report.auc) : json(nullptr)}}},
          {"folds", folds},
          {"images", images}};
}

std::string render_table(const std::vector<MetricsReport>& reports) {
  std::size_t label_width = 0;
  for (const auto& r : reports) label_width = std::max(label_width, r.row_label().size());
  label_width += 2;
  auto pad = [](std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
  };
  constexpr std::size_t cell = 16;
  std::ostringstream out;
  out << pad("", label_width) << pad("Dice / F1", cell) << pad("Sensitivity", cell) << pad("Specificity", cell) << "AUC\n";
  for (const auto& r : reports) {
    out << pad(r.row_label(), label_width) << pad(format_cell(r.dice), cell) << pad(format_cell(r.sensitivity), cell)
        << pad(format_cell(r.specificity), cell) << (r.auc ? format_cell(*r.auc) : std::string("---")) << "\n";
  }
  return out.str();
}

}  // namespace fundus
