#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "ext_scalar.hpp"

namespace steklov {

using Cell = std::variant<std::monostate, double, long long, std::string, ExtScalar>;

// Column kinds fix how a cell is serialized: extended columns expand to
// <name>_log_magnitude and <name>_sign in CSV and to a (sign, significand,
// exponent) object in JSON.
enum class ColumnKind { Real, Integer, Text, Extended };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Real;
};

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> meta;

  void add_row(std::vector<Cell> r) {
    if (r.size() != columns.size()) throw InvalidArgument("table " + name + ": row width mismatch");
    rows.push_back(std::move(r));
  }
};

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

inline std::vector<std::string> csv_header(const Table& t) {
  std::vector<std::string> h;
  for (const auto& c : t.columns) {
    if (c.kind == ColumnKind::Extended) {
      h.push_back(c.name + "_log_magnitude");
      h.push_back(c.name + "_sign");
    } else {
      h.push_back(c.name);
    }
  }
  return h;
}

inline std::vector<std::string> csv_fields(const Table& t, const std::vector<Cell>& row) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const Cell& c = row[i];
    if (t.columns[i].kind == ColumnKind::Extended) {
      if (const auto* e = std::get_if<ExtScalar>(&c)) {
        out.push_back(format_real(e->log_abs()));
        out.push_back(std::to_string(e->sign()));
      } else {
        out.emplace_back();
        out.emplace_back();
      }
      continue;
    }
    if (const auto* d = std::get_if<double>(&c)) out.push_back(format_real(*d));
    else if (const auto* n = std::get_if<long long>(&c)) out.push_back(std::to_string(*n));
    else if (const auto* s = std::get_if<std::string>(&c)) out.push_back(csv_escape(*s));
    else out.emplace_back();
  }
  return out;
}

inline std::string to_csv(const Table& t) {
  std::string s;
  auto join = [&](const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    s += '\n';
  };
  join(csv_header(t));
  for (const auto& r : t.rows) join(csv_fields(t, r));
  return s;
}

inline std::string meta_csv(const Table& t) {
  std::string s = "key,value\n";
  for (const auto& [k, v] : t.meta) s += csv_escape(k) + "," + csv_escape(v) + "\n";
  return s;
}

using Json = nlohmann::ordered_json;

inline Json real_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

inline Json ext_json(const ExtScalar& e) {
  return Json{{"sign", e.sign()}, {"significand", e.significand()}, {"exponent", e.exponent()}};
}

inline ExtScalar ext_from_json(const Json& j) {
  return ExtScalar::from_parts(j.at("sign").get<int>() * j.at("significand").get<double>(),
                               j.at("exponent").get<std::int64_t>());
}

inline Json to_json(const Table& t) {
  Json j;
  j["table"] = t.name;
  Json meta = Json::object();
  for (const auto& [k, v] : t.meta) meta[k] = v;
  j["meta"] = meta;
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json o = Json::object();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto& name = t.columns[i].name;
      const Cell& c = r[i];
      if (const auto* d = std::get_if<double>(&c)) o[name] = real_json(*d);
      else if (const auto* n = std::get_if<long long>(&c)) o[name] = *n;
      else if (const auto* s = std::get_if<std::string>(&c)) o[name] = *s;
      else if (const auto* e = std::get_if<ExtScalar>(&c)) o[name] = ext_json(*e);
      else o[name] = nullptr;
    }
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  return j;
}

// Rebuilds a table from its JSON form given the column layout.
inline Table table_from_json(const Json& j, const std::vector<Column>& cols) {
  Table t;
  t.name = j.at("table").get<std::string>();
  t.columns = cols;
  for (const auto& [k, v] : j.at("meta").items()) t.meta.emplace_back(k, v.get<std::string>());
  for (const auto& o : j.at("rows")) {
    std::vector<Cell> r;
    for (const auto& c : cols) {
      const Json& v = o.at(c.name);
      if (v.is_null()) {
        r.emplace_back();
      } else if (c.kind == ColumnKind::Extended) {
        r.emplace_back(ext_from_json(v));
      } else if (c.kind == ColumnKind::Integer) {
        r.emplace_back(v.get<long long>());
      } else if (c.kind == ColumnKind::Text) {
        r.emplace_back(v.get<std::string>());
      } else if (v.is_string()) {
        r.emplace_back(std::strtod(v.get<std::string>().c_str(), nullptr));
      } else {
        r.emplace_back(v.get<double>());
      }
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

struct Formats {
  bool csv = true, json = false, plotdata = false;
};

class OutputSink {
 public:
  OutputSink(std::filesystem::path dir, Formats f) : dir_(std::move(dir)), fmt_(f) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& dir() const { return dir_; }
  const Formats& formats() const { return fmt_; }
  const std::vector<std::string>& written() const { return written_; }

  void table(const Table& t) {
    if (fmt_.csv) {
      write(t.name + ".csv", to_csv(t));
      if (!t.meta.empty()) write(t.name + "_meta.csv", meta_csv(t));
    }
    if (fmt_.json) write(t.name + ".json", to_json(t).dump(1) + "\n");
  }

  // Two-column whitespace-separated data named <quantity>_<mode>_<branch>.dat.
  void plot(const std::string& quantity, const std::string& mode, const std::string& branch,
            const std::vector<std::pair<double, double>>& xy) {
    if (!fmt_.plotdata) return;
    std::string s;
    for (const auto& [x, y] : xy) s += format_real(x) + " " + format_real(y) + "\n";
    write(quantity + "_" + mode + "_" + branch + ".dat", s);
  }

 private:
  void write(const std::string& file, const std::string& content) {
    auto p = dir_ / file;
    std::ofstream o(p, std::ios::binary);
    if (!o) throw ConfigError("cannot write '" + p.string() + "'");
    o << content;
    written_.push_back(p.string());
  }

  std::filesystem::path dir_;
  Formats fmt_;
  std::vector<std::string> written_;
};

}  // namespace steklov
