#include "fundus/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

#include "fundus/raster_io.hpp"

namespace fundus {
namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::InvalidConfig, message); }

enum class ValueKind { Bool, Integer, Float, String };

struct Value {
  ValueKind kind = ValueKind::String;
  std::string text;  // integer digits or string contents
  bool boolean = false;
  double number = 0.0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string strip_underscores(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '_') {
      if (i == 0 || i + 1 == s.size() || !std::isdigit(static_cast<unsigned char>(s[i - 1])) ||
          !std::isdigit(static_cast<unsigned char>(s[i + 1])))
        invalid("misplaced underscore in number '" + std::string(s) + "'");
      continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

// Parses one literal from the front of `s`; `rest` receives what follows.
Value parse_literal(std::string_view s, std::string_view& rest) {
  Value v;
  if (s.empty()) invalid("missing value");
  if (s.front() == '"' || s.front() == '\'') {
    const char quote = s.front();
    v.kind = ValueKind::String;
    std::size_t i = 1;
    for (; i < s.size() && s[i] != quote; ++i) {
      if (quote == '"' && s[i] == '\\') {
        if (++i >= s.size()) break;
        switch (s[i]) {
          case '"': v.text.push_back('"'); break;
          case '\\': v.text.push_back('\\'); break;
          case 'n': v.text.push_back('\n'); break;
          case 't': v.text.push_back('\t'); break;
          default: invalid(std::string("unsupported escape \\") + s[i]);
        }
      } else {
        v.text.push_back(s[i]);
      }
    }
    if (i >= s.size()) invalid("unterminated string");
    rest = s.substr(i + 1);
    return v;
  }

  const auto end = s.find_first_of(" \t#");
  const std::string_view token = s.substr(0, end);
  rest = end == std::string_view::npos ? std::string_view{} : s.substr(end);
  if (token == "true" || token == "false") {
    v.kind = ValueKind::Bool;
    v.boolean = token == "true";
    return v;
  }
  const std::string_view unsigned_part = (token.front() == '+' || token.front() == '-') ? token.substr(1) : token;
  if (unsigned_part == "inf" || unsigned_part == "nan") {
    v.kind = ValueKind::Float;
    v.number = unsigned_part == "inf" ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
    if (token.front() == '-') v.number = -v.number;
    return v;
  }
  const std::string digits = strip_underscores(token);
  if (digits.empty()) invalid("missing value");
  const bool is_float = digits.find_first_of(".eE") != std::string::npos;
  const char* begin = digits.data() + (digits.front() == '+' ? 1 : 0);
  const char* last = digits.data() + digits.size();
  if (is_float) {
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(begin, last, d);
    if (ec != std::errc() || ptr != last) invalid("malformed float '" + std::string(token) + "'");
    v.kind = ValueKind::Float;
    v.number = d;
    return v;
  }
  long long i = 0;
  auto [ptr, ec] = std::from_chars(begin, last, i);
  if (ec == std::errc() && ptr == last) {
    v.kind = ValueKind::Integer;
    v.text = std::string(begin, last);
    v.number = static_cast<double>(i);
    return v;
  }
  // Unsigned values beyond int64 are accepted for seeds.
  unsigned long long u = 0;
  auto [uptr, uec] = std::from_chars(begin, last, u);
  if (uec == std::errc() && uptr == last) {
    v.kind = ValueKind::Integer;
    v.text = std::string(begin, last);
    v.number = static_cast<double>(u);
    return v;
  }
  invalid("unrecognized value '" + std::string(token) + "'");
}

std::string format_float(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, d);
  std::string s(buffer, ptr);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

struct Field {
  std::string table;
  std::string key;
  ValueKind kind;
  std::function<void(PipelineConfig&, const Value&)> set;
  std::function<std::string(const PipelineConfig&)> show;
};

int to_int(const Value& v, const std::string& name) {
  long long i = 0;
  auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), i);
  if (ec != std::errc() || i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
    invalid(name + " is out of range");
  return static_cast<int>(i);
}

std::uint64_t to_u64(const Value& v, const std::string& name) {
  if (!v.text.empty() && v.text.front() == '-') invalid(name + " must be non-negative");
  unsigned long long u = 0;
  auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), u);
  if (ec != std::errc()) invalid(name + " is out of range");
  return u;
}

// Getters hand out a mutable reference; `show` reads through a copy.
template <typename Get>
Field make_float(std::string table, std::string key, Get get) {
  return {table, key, ValueKind::Float, [get](PipelineConfig& c, const Value& v) { get(c) = v.number; },
          [get](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return format_float(get(copy));
          }};
}

template <typename Get>
Field make_int(std::string table, std::string key, Get get) {
  const std::string name = table + "." + key;
  return {table, key, ValueKind::Integer, [get, name](PipelineConfig& c, const Value& v) { get(c) = to_int(v, name); },
          [get](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return std::to_string(get(copy));
          }};
}

template <typename Get>
Field make_u64(std::string table, std::string key, Get get) {
  const std::string name = table + "." + key;
  return {table, key, ValueKind::Integer, [get, name](PipelineConfig& c, const Value& v) { get(c) = to_u64(v, name); },
          [get](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return std::to_string(get(copy));
          }};
}

template <typename Get>
Field make_bool(std::string table, std::string key, Get get) {
  return {table, key, ValueKind::Bool, [get](PipelineConfig& c, const Value& v) { get(c) = v.boolean; },
          [get](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return std::string(get(copy) ? "true" : "false");
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(make_float("clahe", "clip_limit", [](PipelineConfig& c) -> double& { return c.clahe.clip_limit; }));
    f.push_back(make_int("clahe", "tiles_x", [](PipelineConfig& c) -> int& { return c.clahe.tiles_x; }));
    f.push_back(make_int("clahe", "tiles_y", [](PipelineConfig& c) -> int& { return c.clahe.tiles_y; }));
    f.push_back(make_bool("clahe", "before_resize", [](PipelineConfig& c) -> bool& { return c.clahe_before_resize; }));
    f.push_back(make_int("resize", "size", [](PipelineConfig& c) -> int& { return c.resize; }));
    f.push_back(make_u64("augment", "seed", [](PipelineConfig& c) -> std::uint64_t& { return c.augment.seed; }));
    f.push_back(make_bool("augment", "rotate", [](PipelineConfig& c) -> bool& { return c.augment.rotate; }));
    f.push_back(make_bool("augment", "flip", [](PipelineConfig& c) -> bool& { return c.augment.flip; }));
    f.push_back(make_bool("augment", "brightness", [](PipelineConfig& c) -> bool& { return c.augment.brightness; }));
    f.push_back(make_bool("augment", "contrast", [](PipelineConfig& c) -> bool& { return c.augment.contrast; }));
    f.push_back(make_float("augment", "flip_probability", [](PipelineConfig& c) -> double& { return c.augment.flip_probability; }));
    f.push_back(make_float("augment", "brightness_max_delta",
                           [](PipelineConfig& c) -> double& { return c.augment.brightness_max_delta; }));
    f.push_back(make_float("augment", "contrast_min", [](PipelineConfig& c) -> double& { return c.augment.contrast_min; }));
    f.push_back(make_float("augment", "contrast_max", [](PipelineConfig& c) -> double& { return c.augment.contrast_max; }));
    f.push_back(make_float("metrics", "threshold", [](PipelineConfig& c) -> double& { return c.metrics.threshold; }));
    f.push_back(make_bool("metrics", "fov", [](PipelineConfig& c) -> bool& { return c.metrics.fov; }));
    f.push_back({"metrics", "ci", ValueKind::String,
                 [](PipelineConfig& c, const Value& v) { c.metrics.ci = ci_mode_from_string(v.text); },
                 [](const PipelineConfig& c) { return quote(std::string(to_string(c.metrics.ci))); }});
    f.push_back({"metrics", "pooling", ValueKind::String,
                 [](PipelineConfig& c, const Value& v) { c.metrics.pooling = pooling_from_string(v.text); },
                 [](const PipelineConfig& c) { return quote(std::string(to_string(c.metrics.pooling))); }});
    f.push_back(make_int("split", "k", [](PipelineConfig& c) -> int& { return c.split.k; }));
    f.push_back(make_u64("split", "seed", [](PipelineConfig& c) -> std::uint64_t& { return c.split.seed; }));
    return f;
  }();
  return all;
}

const Field* find_field(std::string_view table, std::string_view key) {
  for (const auto& f : fields())
    if (f.table == table && f.key == key) return &f;
  return nullptr;
}

bool known_table(std::string_view table) {
  for (const auto& f : fields())
    if (f.table == table) return true;
  return false;
}

void assign(PipelineConfig& config, const Field& field, const Value& value) {
  const std::string name = field.table + "." + field.key;
  const bool compatible = value.kind == field.kind || (field.kind == ValueKind::Float && value.kind == ValueKind::Integer);
  if (!compatible) invalid(name + " has the wrong type");
  field.set(config, value);
}

}  // namespace

StandardizeOptions PipelineConfig::standardize_options() const { return {clahe, resize, clahe_before_resize}; }

EvalOptions PipelineConfig::eval_options(int jobs) const {
  EvalOptions o;
  o.threshold = metrics.threshold;
  o.use_fov = metrics.fov;
  o.ci = metrics.ci;
  o.pooling = metrics.pooling;
  o.standard_size = resize;
  o.fold_seed = split.seed;
  o.jobs = jobs;
  return o;
}

bool operator==(const PipelineConfig& a, const PipelineConfig& b) { return to_toml(a) == to_toml(b); }

void validate(const PipelineConfig& c) {
  if (!(c.clahe.clip_limit > 0.0)) invalid("clahe.clip_limit must be positive");
  if (c.clahe.tiles_x < 1 || c.clahe.tiles_y < 1) invalid("clahe.tiles_x and clahe.tiles_y must be at least 1");
  if (c.resize < 1) invalid("resize.size must be at least 1");
  if (!(c.augment.flip_probability >= 0.0 && c.augment.flip_probability <= 1.0))
    invalid("augment.flip_probability must lie in [0,1]");
  if (!(c.augment.brightness_max_delta >= 0.0 && c.augment.brightness_max_delta <= 255.0))
    invalid("augment.brightness_max_delta must lie in [0,255]");
  if (!(c.augment.contrast_min > 0.0 && c.augment.contrast_min <= c.augment.contrast_max && std::isfinite(c.augment.contrast_max)))
    invalid("augment.contrast_min/contrast_max must satisfy 0 < min <= max < inf");
  if (!(c.metrics.threshold > 0.0 && c.metrics.threshold < 1.0)) invalid("metrics.threshold must lie in (0,1)");
  if (c.split.k < 2) invalid("split.k must be at least 2");
}

PipelineConfig parse_config(std::string_view toml) {
  PipelineConfig config;
  std::string table;
  std::set<std::string> seen_tables, seen_keys;
  std::istringstream in{std::string(toml)};
  std::string raw;
  int line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    const std::string where = "line " + std::to_string(line_number) + ": ";
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    try {
      if (line.front() == '[') {
        const auto close = line.find(']');
        if (close == std::string_view::npos) invalid("unterminated table header");
        const auto after = trim(line.substr(close + 1));
        if (!after.empty() && after.front() != '#') invalid("trailing characters after table header");
        table = std::string(trim(line.substr(1, close - 1)));
        if (!known_table(table)) invalid("unknown table [" + table + "]");
        if (!seen_tables.insert(table).second) invalid("duplicate table [" + table + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) invalid("expected key = value");
      std::string key(trim(line.substr(0, eq)));
      std::string table_for_key = table;
      if (const auto dot = key.find('.'); dot != std::string::npos) {
        if (!table.empty()) invalid("dotted keys are only accepted outside tables");
        table_for_key = key.substr(0, dot);
        key = key.substr(dot + 1);
      }
      const Field* field = find_field(table_for_key, key);
      if (!field) invalid("unknown key '" + (table_for_key.empty() ? key : table_for_key + "." + key) + "'");
      if (!seen_keys.insert(table_for_key + "." + key).second) invalid("duplicate key '" + table_for_key + "." + key + "'");
      std::string_view rest;
      const Value value = parse_literal(trim(line.substr(eq + 1)), rest);
      rest = trim(rest);
      if (!rest.empty() && rest.front() != '#') invalid("trailing characters after value");
      assign(config, *field, value);
    } catch (const Error& e) {
      invalid(where + e.detail());
    }
  }
  validate(config);
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    invalid(path.string() + ": " + e.detail());
  }
}

std::string to_toml(const PipelineConfig& config) {
  std::string out;
  std::string table;
  for (const auto& f : fields()) {
    if (f.table != table) {
      if (!table.empty()) out += "\n";
      table = f.table;
      out += "[" + table + "]\n";
    }
    out += f.key + " = " + f.show(config) + "\n";
  }
  return out;
}

void apply_override(PipelineConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) invalid("override must look like table.key=value");
  const std::string name(trim(assignment.substr(0, eq)));
  const auto dot = name.find('.');
  if (dot == std::string::npos) invalid("override key must be table.key, got '" + name + "'");
  const Field* field = find_field(name.substr(0, dot), name.substr(dot + 1));
  if (!field) invalid("unknown key '" + name + "'");
  const std::string_view text = trim(assignment.substr(eq + 1));
  Value value;
  if (field->kind == ValueKind::String && !text.empty() && text.front() != '"' && text.front() != '\'') {
    value.text = std::string(text);
  } else {
    std::string_view rest;
    value = parse_literal(text, rest);
    if (!trim(rest).empty()) invalid("trailing characters in override for " + name);
  }
  PipelineConfig updated = config;
  assign(updated, *field, value);
  validate(updated);
  config = updated;
}

}  // namespace fundus
