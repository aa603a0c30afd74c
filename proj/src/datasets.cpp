#include "fundus/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "fundus/hash.hpp"
#include "fundus/parallel.hpp"
#include "fundus/raster_io.hpp"
#include "fundus/rng.hpp"

namespace fundus {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& readable_extensions() {
  static const std::vector<std::string> exts = {".png", ".ppm", ".pgm", ".bmp", ".jpg", ".jpeg"};
  return exts;
}

const std::string kExtensionPattern = R"(\.(png|ppm|pgm|bmp|jpg|jpeg))";

std::optional<fs::path> find_with_stem(const fs::path& dir, const std::string& stem) {
  for (const auto& ext : readable_extensions()) {
    const fs::path candidate = dir / (stem + ext);
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

std::string describe_missing(const fs::path& dir, const std::string& stem) {
  std::string message = (dir / stem).string() + ".{png,ppm,pgm,bmp,jpg}";
  for (const char* raw : {".tif", ".gif", ".ppm.gz"}) {
    if (fs::exists(dir / (stem + raw))) {
      message += " (found " + stem + raw + "; convert it to PNG first)";
      break;
    }
  }
  return message;
}

// Ids of files in `dir` whose names match `pattern`; group 1 is the id.
std::vector<std::string> scan_ids(const fs::path& dir, const std::regex& pattern) {
  std::set<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) ids.insert(m[1].str());
  }
  return {ids.begin(), ids.end()};
}

struct Discovery {
  std::vector<Sample> samples;
  std::vector<std::string> missing;
};

void require_dir(const fs::path& dir, Discovery& d) {
  if (!fs::is_directory(dir)) d.missing.push_back(dir.string() + "/ (directory)");
}

void attach(const fs::path& dir, const std::string& stem, std::optional<fs::path>& slot, Discovery& d) {
  slot = find_with_stem(dir, stem);
  if (!slot) d.missing.push_back(describe_missing(dir, stem));
}

Discovery discover_drive(const fs::path& root) {
  Discovery d;
  struct Part {
    const char* dir;
    const char* suffix;
    Split split;
  };
  for (const Part part : {Part{"training", "training", Split::Train}, Part{"test", "test", Split::Test}}) {
    const fs::path base = root / part.dir;
    const fs::path images = base / "images";
    require_dir(images, d);
    if (!fs::is_directory(images)) continue;
    const std::regex pattern(std::string(R"((\d\d)_)") + part.suffix + kExtensionPattern, std::regex::icase);
    const auto ids = scan_ids(images, pattern);
    if (ids.empty()) d.missing.push_back(images.string() + "/NN_" + part.suffix + ".png (no convertible images found)");
    const bool has_second = part.split == Split::Test && fs::is_directory(base / "2nd_manual");
    for (const auto& id : ids) {
      Sample s;
      s.id = id;
      s.dataset = DatasetKind::Drive;
      s.split = part.split;
      s.image = *find_with_stem(images, id + "_" + part.suffix);
      std::optional<fs::path> first, second, fov;
      attach(base / "1st_manual", id + "_manual1", first, d);
      if (first) s.labels["1stHO"] = *first;
      if (has_second) {
        attach(base / "2nd_manual", id + "_manual2", second, d);
        if (second) s.labels["2ndHO"] = *second;
      }
      attach(base / "mask", id + "_" + part.suffix + "_mask", fov, d);
      s.fov = fov;
      d.samples.push_back(std::move(s));
    }
  }
  return d;
}

Discovery discover_stare(const fs::path& root) {
  Discovery d;
  const fs::path images = root / "stare-images";
  require_dir(images, d);
  require_dir(root / "labels-ah", d);
  require_dir(root / "labels-vk", d);
  if (!fs::is_directory(images)) return d;
  const auto ids = scan_ids(images, std::regex(R"((im\d{4}))" + kExtensionPattern, std::regex::icase));
  if (ids.empty()) d.missing.push_back(images.string() + "/imNNNN.ppm (no convertible images found)");
  for (const auto& id : ids) {
    Sample s;
    s.id = id;
    s.dataset = DatasetKind::Stare;
    s.split = Split::Test;
    s.image = *find_with_stem(images, id);
    for (const char* observer : {"ah", "vk"}) {
      std::optional<fs::path> label;
      attach(root / (std::string("labels-") + observer), id + "." + observer, label, d);
      if (label) s.labels[observer] = *label;
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

Discovery discover_chase(const fs::path& root) {
  Discovery d;
  require_dir(root, d);
  if (!fs::is_directory(root)) return d;
  const auto ids = scan_ids(root, std::regex(R"((Image_\d{2}[LR]))" + kExtensionPattern, std::regex::icase));
  if (ids.empty()) d.missing.push_back(root.string() + "/Image_NN[LR].jpg (no images found)");
  for (const auto& id : ids) {
    Sample s;
    s.id = id;
    s.dataset = DatasetKind::ChaseDb1;
    s.split = Split::Test;
    s.image = *find_with_stem(root, id);
    for (const char* observer : {"1stHO", "2ndHO"}) {
      std::optional<fs::path> label;
      attach(root, id + "_" + observer, label, d);
      if (label) s.labels[observer] = *label;
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

Discovery discover(const fs::path& root, DatasetKind kind) {
  Discovery d;
  switch (kind) {
    case DatasetKind::Drive: d = discover_drive(root); break;
    case DatasetKind::Stare: d = discover_stare(root); break;
    case DatasetKind::ChaseDb1: d = discover_chase(root); break;
  }
  std::sort(d.samples.begin(), d.samples.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
  return d;
}

std::map<std::string, json> read_manifest(const fs::path& path) {
  std::map<std::string, json> records;
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto record = json::parse(line);
      if (!record.contains("id") || !record["id"].is_string()) continue;
      const std::string id = record["id"].get<std::string>();
      records[id] = std::move(record);
    } catch (const json::exception&) {
      // A damaged manifest only costs a recompute.
    }
  }
  return records;
}

std::vector<std::uint8_t> to_bytes(const std::string& text) { return {text.begin(), text.end()}; }

json params_json(const StandardizeOptions& options) {
  Provenance p;
  p.clahe = options.clahe;
  p.size = options.size;
  p.clahe_before_resize = options.clahe_before_resize;
  json j = to_json(p);
  j.erase("source");
  j.erase("bbox");
  return j;
}

struct PreparedSample {
  json record;
  std::size_t written = 0;
  bool skipped = false;
  std::optional<CacheFailure> failure;
};

bool outputs_intact(const fs::path& out_dir, const json& record) {
  if (!record.contains("sha256") || !record["sha256"].is_object()) return false;
  for (const auto& [name, digest] : record["sha256"].items()) {
    const fs::path file = out_dir / name;
    if (!fs::is_regular_file(file) || sha256_file(file) != digest.get<std::string>()) return false;
  }
  return true;
}

PreparedSample prepare_one(const Sample& sample, const fs::path& out_dir, const CacheOptions& options,
                           const std::map<std::string, json>& previous) {
  PreparedSample result;
  try {
    const json params = params_json(options.standardize);
    std::string input_hashes = "image:" + sha256_file(sample.image) + "\n";
    for (const auto& [observer, path] : sample.labels) input_hashes += "label:" + observer + ":" + sha256_file(path) + "\n";
    if (sample.fov) input_hashes += "fov:" + sha256_file(*sample.fov) + "\n";
    input_hashes += "source:" + sample.image.string() + "\nparams:" + params.dump() + "\n";
    const std::string input_digest = sha256_hex(input_hashes);

    if (auto it = previous.find(sample.id); it != previous.end() && it->second.value("inputs_sha256", "") == input_digest &&
                                             outputs_intact(out_dir, it->second)) {
      result.record = it->second;
      result.skipped = true;
      return result;
    }

    const RasterImage photo = read_rgb(sample.image);
    const StandardizedImage standardized = standardize(photo, options.standardize, sample.image.string());
    const BoundingBox& bbox = standardized.provenance.bbox;

    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> outputs;
    outputs.emplace_back(sample.id + ".png", encode_raster(standardized.image, RasterFormat::Png));
    outputs.emplace_back(sample.id + ".json", to_bytes(to_json(standardized.provenance).dump(2) + "\n"));

    json labels = json::object();
    for (const auto& [observer, path] : sample.labels) {
      const BinaryMask label = standardize_label(read_mask(path), bbox, photo.size(), options.standardize.size);
      const std::string name = sample.id + "_" + observer + ".png";
      outputs.emplace_back(name, encode_raster(label, RasterFormat::Png));
      labels[observer] = name;
    }

    const BinaryMask raw_fov = sample.fov ? read_mask(*sample.fov) : retina_mask(photo);
    const std::string fov_name = sample.id + "_fov.png";
    outputs.emplace_back(fov_name,
                         encode_raster(standardize_label(raw_fov, bbox, photo.size(), options.standardize.size), RasterFormat::Png));

    json hashes = json::object();
    for (const auto& [name, bytes] : outputs) {
      hashes[name] = sha256_hex(bytes);
      if (write_if_changed(out_dir / name, bytes)) ++result.written;
    }

    result.record = {{"id", sample.id},
                     {"dataset", to_string(sample.dataset)},
                     {"split", to_string(sample.split)},
                     {"source", sample.image.string()},
                     {"image", sample.id + ".png"},
                     {"provenance", sample.id + ".json"},
                     {"labels", labels},
                     {"fov", fov_name},
                     {"fov_source", sample.fov ? "dataset" : "locator"},
                     {"bbox", to_json(standardized.provenance)["bbox"]},
                     {"sha256", hashes},
                     {"inputs_sha256", input_digest},
                     {"params", params}};
  } catch (const std::exception& e) {
    result.failure = CacheFailure{sample.id, e.what()};
  }
  return result;
}

}  // namespace

std::string_view to_string(DatasetKind kind) noexcept {
  switch (kind) {
    case DatasetKind::Drive: return "DRIVE";
    case DatasetKind::Stare: return "STARE";
    case DatasetKind::ChaseDb1: return "CHASE_DB1";
  }
  return "unknown";
}

std::string_view to_string(Split split) noexcept { return split == Split::Train ? "train" : "test"; }

DatasetKind dataset_kind_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "drive") return DatasetKind::Drive;
  if (lower == "stare") return DatasetKind::Stare;
  if (lower == "chase" || lower == "chase_db1" || lower == "chasedb1") return DatasetKind::ChaseDb1;
  throw Error(ErrorCode::UnknownKind, "unknown dataset kind '" + std::string(text) + "' (expected drive, stare or chase)");
}

std::vector<std::string> observers(DatasetKind kind) {
  if (kind == DatasetKind::Stare) return {"ah", "vk"};
  return {"1stHO", "2ndHO"};
}

std::vector<Sample> load_dataset(const fs::path& root, DatasetKind kind) {
  auto d = discover(root, kind);
  if (!d.missing.empty()) {
    std::string message = std::to_string(d.missing.size()) + " missing item(s) under " + root.string() + ":";
    for (const auto& m : d.missing) message += "\n  " + m;
    throw Error(ErrorCode::LayoutMismatch, message);
  }
  return std::move(d.samples);
}

DoctorReport doctor(const fs::path& root, DatasetKind kind) {
  auto d = discover(root, kind);
  DoctorReport report;
  report.missing = std::move(d.missing);
  for (const auto& s : d.samples) (s.split == Split::Train ? report.train_samples : report.test_samples)++;

  std::size_t expected_train = 0, expected_test = 0;
  switch (kind) {
    case DatasetKind::Drive: expected_train = 20, expected_test = 20; break;
    case DatasetKind::Stare: expected_test = 20; break;
    case DatasetKind::ChaseDb1: expected_test = 28; break;
  }
  if (report.train_samples != expected_train || report.test_samples != expected_test)
    report.notes.push_back("found " + std::to_string(report.train_samples) + " train / " +
                           std::to_string(report.test_samples) + " test samples; the official release has " +
                           std::to_string(expected_train) + " / " + std::to_string(expected_test));
  return report;
}

std::vector<std::string> FoldSplit::fold_ids(int fold) const {
  std::vector<std::string> ids;
  for (const auto& [id, f] : assignment)
    if (f == fold) ids.push_back(id);
  return ids;
}

FoldSplit kfold(std::vector<std::string> ids, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::Precondition, "k must be at least 2");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw Error(ErrorCode::Precondition, "duplicate sample ids");
  if (static_cast<std::size_t>(k) > ids.size())
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds the " + std::to_string(ids.size()) + " samples");

  SplitMix64 rng(seed);
  for (std::size_t i = ids.size() - 1; i > 0; --i) std::swap(ids[i], ids[rng.below(i + 1)]);

  FoldSplit split;
  split.k = k;
  split.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) split.assignment[ids[i]] = static_cast<int>(i % k);
  return split;
}

FoldSplit kfold(const std::vector<Sample>& samples, int k, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) ids.push_back(s.id);
  return kfold(std::move(ids), k, seed);
}

json to_json(const FoldSplit& split) {
  json folds = json::array();
  for (int f = 0; f < split.k; ++f) folds.push_back(split.fold_ids(f));
  return {{"k", split.k}, {"seed", split.seed}, {"assignment", split.assignment}, {"folds", folds}};
}

FoldSplit fold_split_from_json(const json& j) {
  try {
    FoldSplit split;
    split.k = j.at("k").get<int>();
    split.seed = j.at("seed").get<std::uint64_t>();
    split.assignment = j.at("assignment").get<std::map<std::string, int>>();
    for (const auto& [id, fold] : split.assignment)
      if (fold < 0 || fold >= split.k) throw Error(ErrorCode::InvalidConfig, "fold index out of range for " + id);
    return split;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed fold split: ") + e.what());
  }
}

bool write_if_changed(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (fs::is_regular_file(path) && fs::file_size(path) == bytes.size()) {
    const auto existing = read_file_bytes(path);
    if (std::equal(existing.begin(), existing.end(), bytes.begin(), bytes.end())) return false;
  }
  write_file_bytes(path, bytes);
  return true;
}

CacheSummary prepare_cache(const std::vector<Sample>& samples, const fs::path& out_dir, const CacheOptions& options) {
  fs::create_directories(out_dir);
  CacheSummary summary;
  summary.manifest = out_dir / "manifest.jsonl";
  const auto previous = read_manifest(summary.manifest);

  std::vector<PreparedSample> results(samples.size());
  parallel_for(samples.size(), options.jobs,
               [&](std::size_t i) { results[i] = prepare_one(samples[i], out_dir, options, previous); });

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return samples[a].id < samples[b].id; });

  std::string manifest_text;
  for (std::size_t i : order) {
    auto& r = results[i];
    summary.files_written += r.written;
    if (r.failure) {
      summary.failures.push_back(*r.failure);
      continue;
    }
    if (r.skipped) ++summary.samples_skipped;
    manifest_text += r.record.dump() + "\n";
    summary.records.push_back(std::move(r.record));
  }
  if (write_if_changed(summary.manifest, to_bytes(manifest_text))) ++summary.files_written;
  return summary;
}

}  // namespace fundus
