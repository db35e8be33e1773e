#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mqe/measure.hpp"

namespace mqe {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Headerless CSV of reals. Lines starting with '#' are comments.
void save_matrix(const Matrix& m, const fs::path& path);
Matrix load_matrix(const fs::path& path);

/// Reads a headerless point CSV with dim coordinate columns and, when
/// weighted, one trailing weight column. Uniform weights otherwise.
DiscreteMeasure load_measure_csv(const fs::path& path, Index dim, bool weighted);
void save_measure_csv(const DiscreteMeasure& m, const fs::path& path, bool weighted);

/// Manifest schema:
///   { "dim": d, "weighted": bool?, "measures": [ { "id": str, "path": str,
///     "label": str|null, "weighted": bool? } ] }
/// Paths are relative to the manifest's directory.
Dataset load_dataset(const fs::path& manifest);

/// Writes <dir>/manifest.json and <dir>/measures/<id>.csv. The weight column
/// is written only when some measure has non-uniform weights.
fs::path save_dataset(const Dataset& ds, const fs::path& dir);

json read_json(const fs::path& path);
void write_json(const json& j, const fs::path& path);
void write_text(const std::string& text, const fs::path& path);

}  // namespace mqe
