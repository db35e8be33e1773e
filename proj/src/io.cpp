#include "mqe/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "mqe/error.hpp"

namespace mqe {

namespace {

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view field, const fs::path& path, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    fail(ErrorKind::parse, where(path, line) + ": cannot parse '" + std::string(field) +
                               "' as a real number");
  }
  if (!std::isfinite(value)) fail(ErrorKind::parse, where(path, line) + ": non-finite value");
  return value;
}

// Parses every non-comment, non-blank line into a row of reals.
std::vector<std::pair<std::size_t, std::vector<double>>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view view = trim(text);
    if (view.empty() || view.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      row.push_back(parse_real(view.substr(start, comma == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : comma - start),
                               path, line));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.emplace_back(line, std::move(row));
  }
  return rows;
}

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void save_matrix(const Matrix& m, const fs::path& path) {
  std::ofstream out = open_for_write(path);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

Matrix load_matrix(const fs::path& path) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) fail(ErrorKind::parse, path.string() + ": empty matrix file");
  const std::size_t cols = rows.front().second.size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& [line, values] = rows[r];
    if (values.size() != cols) {
      fail(ErrorKind::parse, where(path, line) + ": ragged row with " +
                                 std::to_string(values.size()) + " columns, expected " +
                                 std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = values[c];
  }
  return m;
}

DiscreteMeasure load_measure_csv(const fs::path& path, Index dim, bool weighted) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) fail(ErrorKind::parse, path.string() + ": measure file has no points");
  const std::size_t expected = static_cast<std::size_t>(dim) + (weighted ? 1 : 0);
  PointMatrix points(static_cast<Index>(rows.size()), dim);
  Vector weights = Vector::Ones(static_cast<Index>(rows.size()));
  double total = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& [line, values] = rows[r];
    if (values.size() != expected) {
      fail(ErrorKind::dimension_mismatch,
           where(path, line) + ": row has " + std::to_string(values.size()) +
               " columns, expected " + std::to_string(expected) + " (dim " +
               std::to_string(dim) + (weighted ? " + weight)" : ")"));
    }
    for (Index c = 0; c < dim; ++c)
      points(static_cast<Index>(r), c) = values[static_cast<std::size_t>(c)];
    if (weighted) {
      const double w = values.back();
      if (w < 0.0) fail(ErrorKind::parse, where(path, line) + ": negative weight");
      weights[static_cast<Index>(r)] = w;
    }
    total += weights[static_cast<Index>(r)];
  }
  if (total <= 0.0) fail(ErrorKind::parse, path.string() + ": zero total weight");
  return DiscreteMeasure(std::move(points), std::move(weights));
}

void save_measure_csv(const DiscreteMeasure& m, const fs::path& path, bool weighted) {
  std::ofstream out = open_for_write(path);
  for (Index r = 0; r < m.size(); ++r) {
    for (Index c = 0; c < m.dim(); ++c) {
      if (c) out << ',';
      out << format_double(m.points()(r, c));
    }
    if (weighted) out << ',' << format_double(m.weight(r));
    out << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

Dataset load_dataset(const fs::path& manifest) {
  const json j = read_json(manifest);
  const std::string ctx = manifest.string();
  if (!j.is_object() || !j.contains("dim") || !j.contains("measures") ||
      !j["dim"].is_number_integer() || !j["measures"].is_array()) {
    fail(ErrorKind::parse, ctx + ": manifest needs integer 'dim' and array 'measures'");
  }
  const Index dim = j["dim"].get<Index>();
  if (dim < 1) fail(ErrorKind::parse, ctx + ": 'dim' must be >= 1");
  const bool weighted_default = j.value("weighted", false);
  const fs::path base = manifest.parent_path();

  std::vector<DiscreteMeasure> measures;
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::size_t labelled = 0;
  for (const auto& entry : j["measures"]) {
    if (!entry.is_object() || !entry.contains("path") || !entry["path"].is_string())
      fail(ErrorKind::parse, ctx + ": every measure entry needs a string 'path'");
    const fs::path path = base / entry["path"].get<std::string>();
    const std::string id = entry.contains("id") && entry["id"].is_string()
                               ? entry["id"].get<std::string>()
                               : "m" + std::to_string(measures.size());
    const bool weighted = entry.value("weighted", weighted_default);
    if (!fs::exists(path)) fail(ErrorKind::io, ctx + ": measure '" + id + "' file '" +
                                                   path.string() + "' does not exist");
    measures.push_back(load_measure_csv(path, dim, weighted));
    ids.push_back(id);
    if (entry.contains("label") && !entry["label"].is_null()) {
      if (!entry["label"].is_string()) fail(ErrorKind::parse, ctx + ": label must be a string or null");
      labels.push_back(entry["label"].get<std::string>());
      ++labelled;
    } else {
      labels.emplace_back();
    }
  }
  if (measures.empty()) fail(ErrorKind::parse, ctx + ": manifest lists no measures");
  if (labelled != 0 && labelled != measures.size())
    fail(ErrorKind::parse, ctx + ": either every measure or none must carry a label");
  std::optional<std::vector<std::string>> opt_labels;
  if (labelled) opt_labels = std::move(labels);
  return Dataset(std::move(measures), std::move(ids), std::move(opt_labels));
}

fs::path save_dataset(const Dataset& ds, const fs::path& dir) {
  bool weighted = false;
  for (const auto& m : ds.measures()) {
    const double u = 1.0 / static_cast<double>(m.size());
    if ((m.weights().array() != u).any()) weighted = true;
  }
  json manifest;
  manifest["dim"] = ds.dim();
  manifest["weighted"] = weighted;
  manifest["measures"] = json::array();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::string rel = "measures/" + ds.ids()[i] + ".csv";
    save_measure_csv(ds.measure(i), dir / rel, weighted);
    json entry{{"id", ds.ids()[i]}, {"path", rel}};
    entry["label"] = ds.labels() ? json((*ds.labels())[i]) : json(nullptr);
    manifest["measures"].push_back(entry);
  }
  const fs::path path = dir / "manifest.json";
  write_json(manifest, path);
  return path;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) { write_text(j.dump(2) + "\n", path); }

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream out = open_for_write(path);
  out << text;
  if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

}  // namespace mqe
