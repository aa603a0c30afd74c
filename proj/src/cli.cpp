#include "fundus/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <ostream>

#include "fundus/augment.hpp"
#include "fundus/config.hpp"
#include "fundus/datasets.hpp"
#include "fundus/evaluate.hpp"
#include "fundus/parallel.hpp"
#include "fundus/raster_io.hpp"
#include "fundus/standardizer.hpp"

namespace fundus::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  int jobs = 1;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PipelineConfig resolve_config(const GlobalOptions& g) {
  PipelineConfig config;
  if (!g.config_path.empty()) {
    config = load_config(g.config_path);
  } else if (const char* env = std::getenv(kConfigEnv); env && *env) {
    config = load_config(env);
  }
  for (const auto& assignment : g.overrides) {
    try {
      apply_override(config, assignment);
    } catch (const Error& e) {
      throw UsageError("--set " + assignment + ": " + e.detail());
    }
  }
  return config;
}

std::vector<std::uint8_t> text_bytes(const std::string& text) { return {text.begin(), text.end()}; }

bool is_readable_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".bmp" || ext == ".jpg" || ext == ".jpeg";
}

// ------------------------------------------------------------------ prep --

struct PrepArgs {
  std::string input;
  std::string out;
  std::string dataset;
};

int cmd_prep(const PrepArgs& args, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = resolve_config(g);
  const fs::path input(args.input), out_dir(args.out);

  if (!args.dataset.empty()) {
    const auto samples = load_dataset(input, dataset_kind_from_string(args.dataset));
    const auto summary = prepare_cache(samples, out_dir, {config.standardize_options(), g.jobs});
    for (const auto& f : summary.failures) err << "error: " << f.id << ": " << f.message << "\n";
    out << "prepared " << summary.records.size() << " of " << samples.size() << " samples into " << out_dir.string()
        << " (" << summary.files_written << " files written, " << summary.samples_skipped << " unchanged)\n";
    return summary.failures.empty() ? kSuccess : kFailure;
  }

  std::vector<fs::path> photos;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input))
      if (entry.is_regular_file() && is_readable_image(entry.path())) photos.push_back(entry.path());
    std::sort(photos.begin(), photos.end());
  } else if (fs::exists(input)) {
    photos.push_back(input);
  } else {
    err << "error: " << input.string() << ": no such file or directory\n";
    return kFailure;
  }
  fs::create_directories(out_dir);

  const auto options = config.standardize_options();
  std::vector<std::string> failures(photos.size());
  parallel_for(photos.size(), g.jobs, [&](std::size_t i) {
    try {
      const auto result = standardize(read_rgb(photos[i]), options, photos[i].string());
      const std::string stem = photos[i].stem().string();
      write_if_changed(out_dir / (stem + ".png"), encode_raster(result.image, RasterFormat::Png));
      write_if_changed(out_dir / (stem + ".json"), text_bytes(to_json(result.provenance).dump(2) + "\n"));
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  std::size_t failed = 0;
  for (std::size_t i = 0; i < photos.size(); ++i) {
    if (failures[i].empty()) continue;
    ++failed;
    err << "error: " << photos[i].string() << ": " << failures[i] << "\n";
  }
  out << "standardized " << photos.size() - failed << " of " << photos.size() << " photos into " << out_dir.string() << "\n";
  return failed == 0 ? kSuccess : kFailure;
}

// ------------------------------------------------------------------ eval --

struct EvalArgs {
  std::string pred;
  std::string root;
  std::string dataset;
  std::string observer;
  std::string json_out;
  std::string table_out;
};

int cmd_eval(const EvalArgs& args, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = resolve_config(g);
  const DatasetKind kind = dataset_kind_from_string(args.dataset);
  const std::string observer = args.observer.empty() ? observers(kind).front() : args.observer;
  const auto samples = load_dataset(args.root, kind);

  MetricsReport report;
  try {
    report = evaluate_model(args.pred, samples, observer, config.eval_options(g.jobs));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MissingPrediction) throw;
    err << "error: incomplete evaluation: " << e.detail() << "\n";
    return kIncomplete;
  }
  const std::string table = render_table({report});
  out << table;
  if (!args.table_out.empty()) write_file_bytes(args.table_out, text_bytes(table));
  if (!args.json_out.empty()) write_file_bytes(args.json_out, text_bytes(to_json(report).dump(2) + "\n"));
  return kSuccess;
}

// --------------------------------------------------------------- overlay --

struct OverlayArgs {
  std::string photo;
  std::string pfm;
  std::string out;
};

int cmd_overlay(const OverlayArgs& args, const GlobalOptions& g, std::ostream& out, std::ostream&) {
  const PipelineConfig config = resolve_config(g);
  const RasterImage photo = read_rgb(args.photo);
  const ProbabilityMap map = read_pfm(args.pfm);
  RasterImage base;
  if (map.size() == photo.size()) {
    base = photo;
  } else if (map.size() == Size{config.resize, config.resize}) {
    base = gray_to_rgb(standardize(photo, config.standardize_options(), args.photo).image);
  } else {
    throw Error(ErrorCode::ShapeMismatch, "map is " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                                              "; expected the photo's shape or the standardized size");
  }
  write_raster(overlay(base, map, config.metrics.threshold), args.out, RasterFormat::Png);
  out << "wrote " << args.out << "\n";
  return kSuccess;
}

// ----------------------------------------------------------------- split --

struct SplitArgs {
  std::string root;
  std::string dataset = "drive";
  std::optional<int> k;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_split(const SplitArgs& args, const GlobalOptions& g, std::ostream& out, std::ostream&) {
  const PipelineConfig config = resolve_config(g);
  const DatasetKind kind = dataset_kind_from_string(args.dataset);
  auto samples = load_dataset(args.root, kind);
  if (kind == DatasetKind::Drive)
    std::erase_if(samples, [](const Sample& s) { return s.split != Split::Train; });
  const FoldSplit split = kfold(samples, args.k.value_or(config.split.k), args.seed.value_or(config.split.seed));
  const std::string text = to_json(split).dump(2) + "\n";
  if (args.out.empty()) {
    out << text;
  } else {
    write_file_bytes(args.out, text_bytes(text));
    out << "wrote " << split.k << " folds over " << split.assignment.size() << " samples to " << args.out << "\n";
  }
  return kSuccess;
}

// ------------------------------------------------------- augment-preview --

struct AugmentArgs {
  std::string image;
  std::optional<std::uint64_t> seed;
  int count = 8;
  std::string out;
};

int cmd_augment_preview(const AugmentArgs& args, const GlobalOptions& g, std::ostream& out, std::ostream&) {
  PipelineConfig config = resolve_config(g);
  if (args.seed) config.augment.seed = *args.seed;
  const GrayImage image = read_gray(args.image);
  if (args.count > 0) fs::create_directories(args.out);
  for (int i = 0; i < args.count; ++i) {
    const AugmentationSample s = sample(config.augment, static_cast<std::uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof name, "aug_%03d.png", i);
    write_raster(apply(image, s), fs::path(args.out) / name, RasterFormat::Png);
    out << json{{"file", name},
                {"seed", config.augment.seed},
                {"index", i},
                {"angle", s.angle},
                {"flip", s.flip},
                {"brightness_delta", s.brightness_delta},
                {"contrast_factor", s.contrast_factor}}
               .dump()
        << "\n";
  }
  return kSuccess;
}

// ---------------------------------------------------------------- doctor --

int cmd_doctor(const std::string& root, const std::string& dataset, std::ostream& out) {
  const DatasetKind kind = dataset_kind_from_string(dataset);
  const DoctorReport report = doctor(root, kind);
  out << to_string(kind) << " at " << root << ": " << report.train_samples << " train, " << report.test_samples
      << " test samples\n";
  for (const auto& note : report.notes) out << "note: " << note << "\n";
  for (const auto& m : report.missing) out << "missing: " << m << "\n";
  out << (report.ok() ? "layout OK\n" : "layout incomplete\n");
  return report.ok() ? kSuccess : kFailure;
}

}  // namespace

RasterImage overlay(const RasterImage& photo, const ProbabilityMap& map, double threshold) {
  if (photo.size() != map.size()) throw Error(ErrorCode::ShapeMismatch, "overlay map and photo shapes differ");
  static constexpr std::uint8_t tint[3] = {255, 0, 0};
  RasterImage out = photo;
  auto values = map.data();
  auto px = out.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(static_cast<double>(values[i]) >= threshold)) continue;
    for (int c = 0; c < 3; ++c) px[3 * i + c] = static_cast<std::uint8_t>((px[3 * i + c] + tint[c] + 1) / 2);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retina fundus standardization, scoring and cross-validation tooling", "fundus-forge"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, std::string("TOML config file (default: $") + kConfigEnv + ")");
  app.add_option("--set", g.overrides, "Override one config key, e.g. --set metrics.threshold=0.6");
  app.add_option("-j,--jobs", g.jobs, "Parallel workers; outputs do not depend on this")->check(CLI::PositiveNumber);

  PrepArgs prep;
  auto* prep_cmd = app.add_subcommand("prep", "Standardize photos (or a whole dataset) to 1024x1024 CLAHE grayscale");
  prep_cmd->add_option("input", prep.input, "Photo, directory of photos, or dataset root")->required();
  prep_cmd->add_option("-o,--out", prep.out, "Output directory")->required();
  prep_cmd->add_option("--dataset", prep.dataset, "Treat input as a dataset root: drive, stare or chase");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score PFM probability maps against a dataset's test labels");
  eval_cmd->add_option("--pred", eval.pred, "Prediction directory (<id>.pfm or fold_<k>/<id>.pfm)")->required();
  eval_cmd->add_option("--root", eval.root, "Dataset root")->required();
  eval_cmd->add_option("--dataset", eval.dataset, "drive, stare or chase")->required();
  eval_cmd->add_option("--observer", eval.observer, "Label set: 1stHO, 2ndHO, ah or vk");
  eval_cmd->add_option("--json", eval.json_out, "Write the full report as JSON");
  eval_cmd->add_option("--table", eval.table_out, "Write the text table to a file");

  OverlayArgs ov;
  auto* overlay_cmd = app.add_subcommand("overlay", "Tint predicted vessels over a photo");
  overlay_cmd->add_option("photo", ov.photo, "Fundus photo")->required();
  overlay_cmd->add_option("pfm", ov.pfm, "Probability map (photo-sized or standardized)")->required();
  overlay_cmd->add_option("-o,--out", ov.out, "Output PNG")->required();

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Write a deterministic k-fold assignment as JSON");
  split_cmd->add_option("--root", split.root, "Dataset root")->required();
  split_cmd->add_option("--dataset", split.dataset, "drive (training set), stare or chase");
  split_cmd->add_option("-k", split.k, "Number of folds (default: split.k)");
  split_cmd->add_option("--seed", split.seed, "Shuffle seed (default: split.seed)");
  split_cmd->add_option("-o,--out", split.out, "Output JSON file (default: stdout)");

  AugmentArgs aug;
  auto* aug_cmd = app.add_subcommand("augment-preview", "Write augmented variants of a standardized image");
  aug_cmd->add_option("image", aug.image, "Standardized PNG")->required();
  aug_cmd->add_option("--seed", aug.seed, "Augmentation seed (default: augment.seed)");
  aug_cmd->add_option("-n", aug.count, "Number of variants")->check(CLI::NonNegativeNumber);
  aug_cmd->add_option("-o,--out", aug.out, "Output directory")->required();

  std::string doctor_root, doctor_dataset;
  auto* doctor_cmd = app.add_subcommand("doctor", "Check a dataset tree against the expected layout");
  doctor_cmd->add_option("--root", doctor_root, "Dataset root")->required();
  doctor_cmd->add_option("--dataset", doctor_dataset, "drive, stare or chase")->required();

  auto* config_cmd = app.add_subcommand("config", "Inspect configuration");
  config_cmd->require_subcommand(1);
  auto* show_cmd = config_cmd->add_subcommand("show", "Print the effective configuration as TOML");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kUsage;
  }

  try {
    if (prep_cmd->parsed()) return cmd_prep(prep, g, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, g, out, err);
    if (overlay_cmd->parsed()) return cmd_overlay(ov, g, out, err);
    if (split_cmd->parsed()) return cmd_split(split, g, out, err);
    if (aug_cmd->parsed()) return cmd_augment_preview(aug, g, out, err);
    if (doctor_cmd->parsed()) return cmd_doctor(doctor_root, doctor_dataset, out);
    if (show_cmd->parsed()) {
      out << to_toml(resolve_config(g));
      return kSuccess;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace fundus::cli
