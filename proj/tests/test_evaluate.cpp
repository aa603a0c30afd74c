#include <doctest.h>

#include "fundus/evaluate.hpp"
#include "fundus/raster_io.hpp"
#include "synthetic.hpp"

using namespace fundus;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path root;
  std::vector<Sample> samples;

  Fixture() : root(synth::temp_dir("evaluate")) {
    synth::write_chase_tree(root / "chase", 2);
    samples = load_dataset(root / "chase", DatasetKind::ChaseDb1);
  }
  ~Fixture() { fs::remove_all(root); }

  fs::path predictions(const std::string& name, int folds, auto&& make) {
    const fs::path dir = root / name;
    for (int f = 0; f < folds; ++f) {
      const fs::path fold_dir = folds == 1 ? dir : dir / ("fold_" + std::to_string(f));
      fs::create_directories(fold_dir);
      for (const auto& s : samples) write_pfm(make(s, f), fold_dir / (s.id + ".pfm"));
    }
    return dir;
  }
};

ProbabilityMap label_map(const Sample& s, const std::string& observer = "1stHO") {
  return mask_to_probability(read_mask(s.labels.at(observer)));
}

}  // namespace

TEST_CASE("labels as predictions score perfectly") {
  Fixture fx;
  const auto dir = fx.predictions("perfect", 5, [](const Sample& s, int) { return label_map(s); });
  const auto report = evaluate_model(dir, fx.samples, "1stHO");
  CHECK(report.folds.size() == 5);
  CHECK(report.images.size() == 5 * fx.samples.size());
  CHECK(report.dataset == "CHASE_DB1");
  CHECK(report.row_label() == "CHASE_DB1 (1stHO)");
  for (const auto* a : {&report.dice, &report.sensitivity, &report.specificity}) {
    CHECK(a->mean == 1.0);
    CHECK(a->ci95 == 0.0);
    CHECK(format_cell(*a) == "1.000 (0.000)");
  }
  REQUIRE(report.auc.has_value());
  CHECK(report.auc->mean == 1.0);

  const auto table = render_table({report});
  CHECK(table.find("Dice / F1") != std::string::npos);
  CHECK(table.find("CHASE_DB1 (1stHO)  1.000 (0.000)") != std::string::npos);
  const auto j = to_json(report);
  CHECK(j["aggregate"]["dice"]["cell"] == "1.000 (0.000)");
  CHECK(j["options"]["fold_seed"] == 42);
  CHECK(j["options"]["fov"] == "fov");
}

TEST_CASE("observer selection") {
  Fixture fx;
  const auto dir = fx.predictions("second", 1, [](const Sample& s, int) { return label_map(s, "2ndHO"); });
  CHECK(evaluate_model(dir, fx.samples, "2ndHO").dice.mean == 1.0);
  CHECK(evaluate_model(dir, fx.samples, "1stHO").dice.mean < 1.0);
  CHECK_THROWS_AS(evaluate_model(dir, fx.samples, "vk"), Error);
}

TEST_CASE("inverted predictions have zero sensitivity") {
  Fixture fx;
  const auto dir = fx.predictions("inverted", 2, [](const Sample& s, int) {
    auto map = label_map(s);
    for (auto& v : map.data()) v = 1.0f - v;
    return map;
  });
  const auto report = evaluate_model(dir, fx.samples, "1stHO");
  CHECK(report.sensitivity.mean == 0.0);
  CHECK(report.auc->mean == 0.0);
}

TEST_CASE("random predictions have chance AUC") {
  Fixture fx;
  const auto dir = fx.predictions("random", 1, [](const Sample& s, int) {
    SplitMix64 rng(std::hash<std::string>{}(s.id));
    auto map = label_map(s);
    for (auto& v : map.data()) v = static_cast<float>(rng.uniform());
    return map;
  });
  const auto report = evaluate_model(dir, fx.samples, "1stHO");
  CHECK(std::abs(report.auc->mean - 0.5) <= 0.05);
}

TEST_CASE("standardized predictions are scored in standardized space") {
  Fixture fx;
  const auto dir = fx.predictions("standard", 1, [](const Sample& s, int) {
    const auto photo = read_rgb(s.image);
    const auto label = standardize_label(read_mask(s.labels.at("1stHO")), locate_retina(photo), photo.size());
    return mask_to_probability(label);
  });
  EvalOptions options;
  options.jobs = 3;
  const auto report = evaluate_model(dir, fx.samples, "1stHO", options);
  CHECK(report.dice.mean == 1.0);
  CHECK(report.specificity.mean == 1.0);
}

TEST_CASE("pooled mode and options") {
  Fixture fx;
  const auto dir = fx.predictions("pooled", 2, [](const Sample& s, int f) {
    auto map = label_map(s);
    if (f == 1) map.data()[0] = 1.0f;  // one false positive outside the FOV
    return map;
  });
  EvalOptions options;
  options.pooling = Pooling::Pooled;
  const auto pooled = evaluate_model(dir, fx.samples, "1stHO", options);
  CHECK(pooled.dice.mean == 1.0);
  options.use_fov = false;
  const auto full = evaluate_model(dir, fx.samples, "1stHO", options);
  CHECK(full.specificity.mean < 1.0);
  CHECK(full.specificity.ci95 > 0.0);
  CHECK(pooling_from_string("pooled") == Pooling::Pooled);
}

TEST_CASE("missing and malformed predictions") {
  Fixture fx;
  const auto dir = fx.predictions("partial", 2, [](const Sample& s, int) { return label_map(s); });
  fs::remove(dir / "fold_0" / (fx.samples[1].id + ".pfm"));
  fs::remove(dir / "fold_1" / (fx.samples[2].id + ".pfm"));
  try {
    evaluate_model(dir, fx.samples, "1stHO");
    FAIL("expected missing-prediction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingPrediction);
    CHECK(std::string(e.what()).find("2 prediction(s) missing") != std::string::npos);
  }

  const auto odd = fx.predictions("odd", 1, [](const Sample&, int) { return ProbabilityMap(7, 9); });
  try {
    evaluate_model(odd, fx.samples, "1stHO");
    FAIL("expected shape-mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}
