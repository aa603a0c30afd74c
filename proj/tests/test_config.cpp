#include <doctest.h>

#include <cmath>

#include "fundus/config.hpp"
#include "fundus/raster_io.hpp"
#include "synthetic.hpp"

using namespace fundus;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Precondition;
}

}  // namespace

TEST_CASE("defaults") {
  const PipelineConfig c;
  CHECK(c.clahe.clip_limit == 2.0);
  CHECK(c.clahe.tiles_x == 8);
  CHECK(c.resize == 1024);
  CHECK(c.clahe_before_resize);
  CHECK(c.augment.seed == 42);
  CHECK(c.augment.flip_probability == 0.5);
  CHECK(c.metrics.threshold == 0.5);
  CHECK(c.metrics.fov);
  CHECK(c.metrics.ci == CiMode::Normal);
  CHECK(c.metrics.pooling == Pooling::PerImage);
  CHECK(c.split.k == 5);
  CHECK(c.split.seed == 42);
  CHECK(parse_config("") == c);
}

TEST_CASE("round trip") {
  PipelineConfig c;
  CHECK(parse_config(to_toml(c)) == c);

  c.clahe = ClaheParams::unclipped(4, 3);
  c.clahe_before_resize = false;
  c.resize = 512;
  c.augment.seed = 18446744073709551615ull;
  c.augment.contrast_min = 0.1 + 0.2;  // not exactly representable as typed
  c.augment.flip = false;
  c.metrics.threshold = 0.35;
  c.metrics.ci = CiMode::StudentT;
  c.metrics.pooling = Pooling::Pooled;
  c.split = {10, 7};
  const auto text = to_toml(c);
  const auto back = parse_config(text);
  CHECK(back == c);
  CHECK(std::isinf(back.clahe.clip_limit));
  CHECK(back.augment.contrast_min == c.augment.contrast_min);
  CHECK(back.augment.seed == c.augment.seed);
  CHECK(to_toml(back) == text);

  SplitMix64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    PipelineConfig r;
    r.clahe.clip_limit = 0.01 + rng.uniform() * 10;
    r.augment.brightness_max_delta = rng.uniform() * 255;
    r.augment.contrast_min = 0.5 + rng.uniform() * 0.5;
    r.augment.contrast_max = 1.0 + rng.uniform();
    r.metrics.threshold = 0.01 + rng.uniform() * 0.98;
    r.augment.seed = rng.next();
    REQUIRE(parse_config(to_toml(r)) == r);
  }
}

TEST_CASE("parsing") {
  const auto c = parse_config(R"(
# comment
[clahe]
clip_limit = 3   # integers are accepted for floats
tiles_x = 4

[metrics]
ci = 'student-t'
pooling = "pooled"
)");
  CHECK(c.clahe.clip_limit == 3.0);
  CHECK(c.clahe.tiles_x == 4);
  CHECK(c.clahe.tiles_y == 8);
  CHECK(c.metrics.ci == CiMode::StudentT);
  CHECK(c.metrics.pooling == Pooling::Pooled);
  CHECK(parse_config("split.k = 1_0\n").split.k == 10);

  CHECK(code_of([] { parse_config("[clahe]\nclip = 2.0\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("[trainer]\nepochs = 3\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("[split]\nk = \"five\"\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("[split]\nk = 2.5\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("[split]\nk = 3\nk = 4\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("[metrics]\nthreshold = 1.5\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("[metrics]\nci = \"bootstrap\"\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("[augment]\nseed = -1\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config("[clahe\n"); }) == ErrorCode::InvalidConfig);
  try {
    parse_config("[split]\n\nbogus = 1\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("overrides") {
  PipelineConfig c;
  apply_override(c, "metrics.threshold=0.6");
  apply_override(c, "metrics.ci=student-t");
  apply_override(c, "clahe.before_resize = false");
  apply_override(c, "split.seed=7");
  CHECK(c.metrics.threshold == 0.6);
  CHECK(c.metrics.ci == CiMode::StudentT);
  CHECK_FALSE(c.clahe_before_resize);
  CHECK(c.split.seed == 7);

  const PipelineConfig before = c;
  CHECK(code_of([&] { apply_override(c, "metrics.threshold=2"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { apply_override(c, "nope.key=1"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { apply_override(c, "threshold"); }) == ErrorCode::InvalidConfig);
  CHECK(c == before);

  const auto s = c.standardize_options();
  CHECK_FALSE(s.clahe_before_resize);
  const auto e = c.eval_options(3);
  CHECK(e.threshold == 0.6);
  CHECK(e.jobs == 3);
  CHECK(e.fold_seed == 7);
}

TEST_CASE("load from file") {
  const auto dir = synth::temp_dir("config");
  const std::string text = "[resize]\nsize = 256\n";
  write_file_bytes(dir / "c.toml", std::vector<std::uint8_t>(text.begin(), text.end()));
  CHECK(load_config(dir / "c.toml").resize == 256);
  CHECK(code_of([&] { load_config(dir / "missing.toml"); }) == ErrorCode::IoError);
  std::filesystem::remove_all(dir);
}
