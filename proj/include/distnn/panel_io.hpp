#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "distnn/matrix.hpp"

namespace distnn {

/// A distributional matrix with string keys on both axes.
struct Panel {
  std::vector<std::string> row_keys;
  std::vector<std::string> col_keys;
  DistributionalMatrix matrix;

  [[nodiscard]] std::optional<std::size_t> row_index(std::string_view key) const;
  [[nodiscard]] std::optional<std::size_t> col_index(std::string_view key) const;
  bool operator==(const Panel&) const = default;
};

/// Panel with keys "r0".."r{rows-1}" and "c0".."c{cols-1}".
Panel make_panel(DistributionalMatrix m);

/// Long CSV with header `row,col,value`. Axis keys keep first-appearance
/// order; records sharing a (row, col) pair form one entry. Fields may be
/// double-quoted; blank lines and lines starting with '#' are skipped. Throws ParseError naming the 1-based line.
Panel read_panel_csv(std::istream& in);
Panel read_panel_csv(std::string_view text);
/// One record per sample, entries row-major, samples ascending.
void write_panel_csv(std::ostream& out, const Panel& panel);

/// {"rows": [...], "cols": [...], "entries": [{"row", "col", "samples"}]}.
/// Unlike CSV this keeps rows or columns with no observed entry.
Panel panel_from_json(const nlohmann::json& doc);
nlohmann::json panel_to_json(const Panel& panel);

/// Picks the JSON reader for a `.json` extension, CSV otherwise.
Panel read_panel_file(const std::filesystem::path& path);
void write_panel_file(const std::filesystem::path& path, const Panel& panel);

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

}  // namespace distnn
