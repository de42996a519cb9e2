#include "report.hpp"

#include <cmath>
#include <cstdio>

namespace jb::cli {

using nlohmann::ordered_json;

Record Record::bound(std::string name, std::string anchor, double residual, double tol) {
  Record r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.residual = residual;
  r.kind = Kind::upper;
  r.set_tolerance(tol);
  return r;
}

// Negative controls: the residual has to stay above min_value.
Record Record::floor(std::string name, std::string anchor, double residual, double min_value) {
  Record r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.residual = residual;
  r.kind = Kind::lower;
  r.set_tolerance(min_value);
  r.verdict = "lower-bound";
  return r;
}

void Record::set_tolerance(double tol) {
  if (kind == Kind::verdict || !residual) return;
  tolerance = tol;
  const double v = *residual;
  pass = std::isfinite(v) && (kind == Kind::upper ? v <= tol : v >= tol);
}

Record Record::check(std::string name, std::string anchor, bool ok, std::string verdict) {
  Record r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.pass = ok;
  r.verdict = std::move(verdict);
  return r;
}

bool Report::all_pass() const {
  for (const auto& r : records)
    if (!r.pass) return false;
  return true;
}

static ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json Report::to_json() const {
  ordered_json j;
  j["schema"] = kSchema;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config;
  ordered_json recs = ordered_json::array();
  for (const auto& r : records) {
    ordered_json o;
    o["name"] = r.name;
    o["anchor"] = r.anchor;
    o["residual"] = r.residual ? number(*r.residual) : ordered_json(nullptr);
    o["tolerance"] = r.kind == Record::Kind::verdict ? ordered_json(nullptr) : number(r.tolerance);
    o["pass"] = r.pass;
    if (!r.verdict.empty()) o["verdict"] = r.verdict;
    if (!r.note.empty()) o["note"] = r.note;
    if (!r.data.is_null()) o["data"] = r.data;
    recs.push_back(std::move(o));
  }
  j["records"] = std::move(recs);
  if (!result.is_null()) j["result"] = result;
  if (!table.is_null()) j["table"] = table;
  j["all_pass"] = all_pass();
  j["timing"] = {{"timestamp", timestamp}, {"wall_time_s", wall_time}};
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_records_csv(std::ostream& os, const std::vector<Record>& records) {
  os << "name,anchor,residual,tolerance,pass,verdict,note\r\n";
  for (const auto& r : records) {
    os << csv_field(r.name) << ',' << csv_field(r.anchor) << ',' << (r.residual ? csv_number(*r.residual) : "")
       << ',' << (r.kind == Record::Kind::verdict ? "" : csv_number(r.tolerance)) << ',' << (r.pass ? "true" : "false") << ',' << csv_field(r.verdict) << ','
       << csv_field(r.note) << "\r\n";
  }
}

void write_table_csv(std::ostream& os, const std::vector<std::string>& columns, const ordered_json& rows) {
  for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_field(columns[i]);
  os << "\r\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < columns.size(); ++i) {
      if (i) os << ',';
      const auto& v = row.at(columns[i]);
      if (v.is_string()) os << csv_field(v.get<std::string>());
      else if (v.is_boolean()) os << (v.get<bool>() ? "true" : "false");
      else if (v.is_number()) os << csv_number(v.get<double>());
    }
    os << "\r\n";
  }
}

}  // namespace jb::cli
