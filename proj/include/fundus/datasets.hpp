#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fundus/standardizer.hpp"

namespace fundus {

enum class DatasetKind { Drive, Stare, ChaseDb1 };
enum class Split { Train, Test };

std::string_view to_string(DatasetKind kind) noexcept;
std::string_view to_string(Split split) noexcept;
/// Accepts drive, stare, chase, chase_db1 (case-insensitive). Throws UnknownKind.
DatasetKind dataset_kind_from_string(std::string_view text);
/// Observer names shipped with a dataset: 1stHO/2ndHO or ah/vk.
std::vector<std::string> observers(DatasetKind kind);

// Canonical layouts (images may be .png, .ppm, .pgm, .bmp, .jpg or .jpeg;
// the original .tif/.gif files must be converted to PNG first):
//
//   DRIVE      training/images/NN_training.*    test/images/NN_test.*
//              training/1st_manual/NN_manual1.* test/1st_manual/NN_manual1.*
//              training/mask/NN_training_mask.* test/2nd_manual/NN_manual2.*
//                                               test/mask/NN_test_mask.*
//   STARE      stare-images/imNNNN.*  labels-ah/imNNNN.ah.*  labels-vk/imNNNN.vk.*
//   CHASE_DB1  Image_NN[LR].*  Image_NN[LR]_1stHO.*  Image_NN[LR]_2ndHO.*  (flat)
//
// DRIVE ids are the two-digit numbers; STARE and CHASE_DB1 are test-only.

struct Sample {
  std::string id;
  std::filesystem::path image;
  std::map<std::string, std::filesystem::path> labels;  // observer -> file
  std::optional<std::filesystem::path> fov;
  DatasetKind dataset = DatasetKind::Drive;
  Split split = Split::Test;
};

/// Sorted by id. Throws LayoutMismatch listing every missing file.
std::vector<Sample> load_dataset(const std::filesystem::path& root, DatasetKind kind);

struct DoctorReport {
  std::vector<std::string> missing;
  std::vector<std::string> notes;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  bool ok() const noexcept { return missing.empty(); }
};

/// Checks a tree against the canonical layout and the official sample counts.
DoctorReport doctor(const std::filesystem::path& root, DatasetKind kind);

struct FoldSplit {
  int k = 5;
  std::uint64_t seed = 42;
  std::map<std::string, int> assignment;  // id -> fold in [0, k)

  std::vector<std::string> fold_ids(int fold) const;
};

/// Sorts ids, shuffles them with SplitMix64(seed) Fisher-Yates, then deals
/// round-robin. Throws KTooLarge when k exceeds the number of ids, and
/// Precondition when k < 2.
FoldSplit kfold(std::vector<std::string> ids, int k = 5, std::uint64_t seed = 42);
FoldSplit kfold(const std::vector<Sample>& samples, int k = 5, std::uint64_t seed = 42);

nlohmann::json to_json(const FoldSplit& split);
FoldSplit fold_split_from_json(const nlohmann::json& j);

struct CacheOptions {
  StandardizeOptions standardize;
  int jobs = 1;
};

struct CacheFailure {
  std::string id;
  std::string message;
};

struct CacheSummary {
  std::filesystem::path manifest;
  std::vector<nlohmann::json> records;  // manifest lines, sorted by id
  std::vector<CacheFailure> failures;
  std::size_t files_written = 0;
  std::size_t samples_skipped = 0;  // unchanged since the previous run
};

/// Standardizes every sample into out_dir: <id>.png, <id>.json (provenance),
/// <id>_<observer>.png per label and <id>_fov.png (dataset FOV, or the
/// locator mask when the dataset has none). Writes manifest.jsonl last.
/// A file whose content is unchanged is not rewritten, and samples whose
/// inputs and parameters match the previous manifest are skipped outright.
/// Per-sample failures are collected, never thrown.
CacheSummary prepare_cache(const std::vector<Sample>& samples, const std::filesystem::path& out_dir,
                           const CacheOptions& options = {});

/// Writes bytes unless the file already holds exactly these bytes.
/// Returns whether a write happened.
bool write_if_changed(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace fundus
