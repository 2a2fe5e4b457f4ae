#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lpturb/error.hpp"

namespace lpturb {

using json = nlohmann::ordered_json;

/// Tabular output: a "# {json}" metadata line, a column-name line, then rows.
/// Numbers are printed with 17 significant digits so tables read back exactly.
struct Table {
  json meta = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    fail(ErrorKind::input, "table has no column '" + name + "'");
  }
  std::vector<double> col(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string render_table(const Table& t) {
  json meta = t.meta;
  meta["columns"] = t.columns;
  std::string out = "# " + meta.dump() + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& r : t.rows) {
    require(r.size() == t.columns.size(), ErrorKind::input, "table row width does not match columns");
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_double(r[i]);
    out += "\n";
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(bool(out), ErrorKind::io, "cannot open '" + path + "' for writing");
  out << text;
  require(bool(out), ErrorKind::io, "write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_table(const std::string& path, const Table& t) { write_text(path, render_table(t)); }

inline Table parse_table(const std::string& text, const std::string& name = "table") {
  std::istringstream in(text);
  std::string line;
  Table t;
  require(std::getline(in, line) && line.rfind("# ", 0) == 0, ErrorKind::format, name + ": missing JSON header line");
  try {
    t.meta = json::parse(line.substr(2));
  } catch (const json::exception& e) {
    fail(ErrorKind::format, name + ": bad JSON header: " + e.what());
  }
  require(bool(std::getline(in, line)), ErrorKind::format, name + ": missing column line");
  std::stringstream cols(line);
  for (std::string c; std::getline(cols, c, ',');) t.columns.push_back(c);
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    for (std::string c; std::getline(cells, c, ',');) {
      double v = 0.0;
      auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
        // from_chars rejects "inf"/"nan" spellings produced by to_chars on some libraries
        if (c == "inf") v = std::numeric_limits<double>::infinity();
        else if (c == "-inf") v = -std::numeric_limits<double>::infinity();
        else if (c == "nan") v = std::numeric_limits<double>::quiet_NaN();
        else fail(ErrorKind::format, name + ": bad number '" + c + "' on line " + std::to_string(lineno));
      }
      row.push_back(v);
    }
    require(row.size() == t.columns.size(), ErrorKind::format,
            name + ": line " + std::to_string(lineno) + " has " + std::to_string(row.size()) + " cells");
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table read_table(const std::string& path) { return parse_table(read_text(path), path); }

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::format, path + ": " + e.what());
  }
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace lpturb
