#include "distnn/panel_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>
#include <utility>

#include "distnn/error.hpp"

namespace distnn {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::string field;
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos < line.size() && line[pos] == '"') {
      ++pos;
      bool closed = false;
      while (pos < line.size()) {
        if (line[pos] == '"') {
          if (pos + 1 < line.size() && line[pos + 1] == '"') {
            field += '"';
            pos += 2;
            continue;
          }
          ++pos;
          closed = true;
          break;
        }
        field += line[pos++];
      }
      if (!closed) parse_error(line_no, "unterminated quoted field");
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
      if (pos < line.size() && line[pos] != ',') parse_error(line_no, "text after closing quote");
    } else {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      field = std::string(trim(line.substr(pos, end - pos)));
      pos = end;
    }
    fields.push_back(std::move(field));
    if (pos >= line.size()) break;
    ++pos;  // comma
  }
  return fields;
}

double parse_value(const std::string& text, std::size_t line_no) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || text.empty()) {
    parse_error(line_no, "value '" + text + "' is not a number");
  }
  if (!std::isfinite(x)) parse_error(line_no, "value '" + text + "' is not finite");
  return x;
}

std::string quote_if_needed(const std::string& key) {
  const bool plain = !key.empty() && key.find_first_of(",\"\r\n") == std::string::npos &&
                     key.front() != ' ' && key.back() != ' ' && key.front() != '\t' && key.back() != '\t';
  if (plain) return key;
  std::string out = "\"";
  for (char c : key) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::size_t intern(std::vector<std::string>& keys, std::map<std::string, std::size_t>& index,
                   const std::string& key) {
  const auto [it, inserted] = index.emplace(key, keys.size());
  if (inserted) keys.push_back(key);
  return it->second;
}

Panel assemble(std::vector<std::string> row_keys, std::vector<std::string> col_keys,
               const std::map<std::pair<std::size_t, std::size_t>, std::vector<double>>& groups) {
  DistributionalMatrix m(row_keys.size(), col_keys.size());
  Panel p{std::move(row_keys), std::move(col_keys), std::move(m)};
  for (const auto& [cell, samples] : groups) {
    p.matrix.set(cell.first, cell.second, EmpiricalDistribution::from_samples(samples));
  }
  return p;
}

}  // namespace

std::optional<std::size_t> Panel::row_index(std::string_view key) const {
  for (std::size_t i = 0; i < row_keys.size(); ++i) {
    if (row_keys[i] == key) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Panel::col_index(std::string_view key) const {
  for (std::size_t j = 0; j < col_keys.size(); ++j) {
    if (col_keys[j] == key) return j;
  }
  return std::nullopt;
}

Panel make_panel(DistributionalMatrix m) {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back("r" + std::to_string(i));
  for (std::size_t j = 0; j < m.cols(); ++j) cols.push_back("c" + std::to_string(j));
  return {std::move(rows), std::move(cols), std::move(m)};
}

Panel read_panel_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::string> row_keys;
  std::vector<std::string> col_keys;
  std::map<std::string, std::size_t> row_index;
  std::map<std::string, std::size_t> col_index;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> groups;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (trim(view).empty() || trim(view).front() == '#') continue;
    const auto fields = split_record(view, line_no);
    if (!have_header) {
      if (fields.size() != 3 || fields[0] != "row" || fields[1] != "col" || fields[2] != "value") {
        parse_error(line_no, "expected header 'row,col,value'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) {
      parse_error(line_no, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) parse_error(line_no, "empty row or column key");
    const double value = parse_value(fields[2], line_no);
    const std::size_t i = intern(row_keys, row_index, fields[0]);
    const std::size_t j = intern(col_keys, col_index, fields[1]);
    groups[{i, j}].push_back(value);
  }
  if (!have_header) parse_error(line_no == 0 ? 1 : line_no, "missing header 'row,col,value'");
  if (groups.empty()) parse_error(line_no, "no records");
  return assemble(std::move(row_keys), std::move(col_keys), groups);
}

Panel read_panel_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_panel_csv(in);
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
  out << "row,col,value\n";
  for (std::size_t i = 0; i < panel.matrix.rows(); ++i) {
    for (std::size_t j = 0; j < panel.matrix.cols(); ++j) {
      const auto& entry = panel.matrix.entry(i, j);
      if (!entry) continue;
      const std::string prefix = quote_if_needed(panel.row_keys[i]) + "," + quote_if_needed(panel.col_keys[j]) + ",";
      for (double x : entry->samples()) out << prefix << format_double(x) << '\n';
    }
  }
}

Panel panel_from_json(const nlohmann::json& doc) {
  auto fail = [](const std::string& what) -> void { throw Error(ErrorCode::ParseError, "json panel: " + what); };
  if (!doc.is_object() || !doc.contains("rows") || !doc.contains("cols") || !doc.contains("entries")) {
    fail("expected an object with rows, cols and entries");
  }
  std::vector<std::string> row_keys;
  std::vector<std::string> col_keys;
  std::map<std::string, std::size_t> row_index;
  std::map<std::string, std::size_t> col_index;
  auto read_keys = [&](const nlohmann::json& arr, std::vector<std::string>& keys,
                       std::map<std::string, std::size_t>& index, const char* name) {
    if (!arr.is_array()) fail(std::string(name) + " must be an array");
    for (const auto& k : arr) {
      if (!k.is_string()) fail(std::string(name) + " keys must be strings");
      const std::size_t before = keys.size();
      intern(keys, index, k.get<std::string>());
      if (keys.size() == before) fail(std::string("duplicate key in ") + name);
    }
  };
  read_keys(doc["rows"], row_keys, row_index, "rows");
  read_keys(doc["cols"], col_keys, col_index, "cols");

  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> groups;
  if (!doc["entries"].is_array()) fail("entries must be an array");
  for (const auto& e : doc["entries"]) {
    if (!e.is_object() || !e.contains("row") || !e.contains("col") || !e.contains("samples")) {
      fail("entry needs row, col and samples");
    }
    if (!e["row"].is_string() || !e["col"].is_string()) fail("entry keys must be strings");
    const auto r = row_index.find(e["row"].get<std::string>());
    const auto c = col_index.find(e["col"].get<std::string>());
    if (r == row_index.end() || c == col_index.end()) fail("entry references an unknown key");
    auto& samples = groups[{r->second, c->second}];
    if (!samples.empty()) fail("duplicate entry");
    if (!e["samples"].is_array() || e["samples"].empty()) fail("samples must be a non-empty array");
    for (const auto& x : e["samples"]) {
      if (!x.is_number()) fail("samples must be numbers");
      const double v = x.get<double>();
      if (!std::isfinite(v)) fail("samples must be finite");
      samples.push_back(v);
    }
  }
  return assemble(std::move(row_keys), std::move(col_keys), groups);
}

nlohmann::json panel_to_json(const Panel& panel) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < panel.matrix.rows(); ++i) {
    for (std::size_t j = 0; j < panel.matrix.cols(); ++j) {
      const auto& entry = panel.matrix.entry(i, j);
      if (!entry) continue;
      nlohmann::json e;
      e["row"] = panel.row_keys[i];
      e["col"] = panel.col_keys[j];
      e["samples"] = entry->samples();
      entries.push_back(std::move(e));
    }
  }
  return {{"rows", panel.row_keys}, {"cols", panel.col_keys}, {"entries", std::move(entries)}};
}

Panel read_panel_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  if (path.extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return panel_from_json(doc);
  }
  try {
    return read_panel_csv(in);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_panel_file(const std::filesystem::path& path, const Panel& panel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  if (path.extension() == ".json") {
    out << panel_to_json(panel).dump(2) << '\n';
  } else {
    write_panel_csv(out, panel);
  }
}

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace distnn
