#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "signorini/grid.hpp"

namespace signorini {

using Json = nlohmann::json;

constexpr int kSchemaVersion = 1;

// Bundled experiment configurations.
std::vector<std::string> preset_names();
Json preset_config(const std::string& name);

// Parses JSON text; syntax errors are reported with line and column.
Json parse_config_text(const std::string& text);
// Reads, parses and normalizes a config file. Validation errors name the
// offending key and the line where it appears.
Json load_config(const std::string& path);
// Merges the config over the defaults and validates it. Throws Error(Config).
Json normalize_config(const Json& cfg, const std::string& source_text = "");

struct RunOptions {
  std::string out_dir;
  std::string cache_dir;  // empty: <out_dir>/cache
};

// Full pipeline; returns the summary (also written to <out_dir>/summary.json).
// Stage failures are recorded in the summary and in error_manifest.json.
Json run_experiment(const Json& config, const RunOptions& opt);

// Sorted keys, two-space indent, doubles with 17 significant digits,
// non-finite doubles as the strings "inf", "-inf", "nan".
std::string dump_json(const Json& j);

struct DiffEntry {
  std::string path;
  Json a, b;
  double abs_diff = 0.0;
  double ratio = 0.0;  // b / a for numbers
  double tol_abs = 0.0, tol_rel = 0.0;
  bool violated = false;
};

struct CompareResult {
  std::vector<DiffEntry> entries;  // differing leaves only
  std::size_t violations = 0;
  Json to_json() const;
};

// Fieldwise comparison. tolerances: {"default": {"abs": a, "rel": r},
// "/json/pointer/prefix": {"abs": ..., "rel": ..., "ignore": bool}}; the
// longest matching prefix applies. A difference is a violation when
// |a - b| > max(abs, rel max(|a|, |b|)); differing strings always violate
// unless ignored.
// Structural mismatches throw Error(InvalidArgument).
CompareResult compare_summaries(const Json& a, const Json& b, const Json& tolerances = Json::object());

// Binary SolutionField: magic, dim, inv_h, half, mode, size, doubles.
void save_field(const Field& f, const std::string& path);
Field load_field(GridPtr grid, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace signorini
