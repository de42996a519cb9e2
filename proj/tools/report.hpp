#pragma once

#include "json.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace jb::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSchema = "report_v1";

struct Record {
  enum class Kind { upper, lower, verdict };
  Kind kind = Kind::verdict;
  std::string name;
  std::string anchor;
  std::optional<double> residual;  // absent for pure verdict records
  double tolerance = 0;
  bool pass = false;
  std::string verdict;
  std::string note;
  nlohmann::ordered_json data;  // residual arrays and other per-check payloads

  static Record bound(std::string name, std::string anchor, double residual, double tol);
  static Record floor(std::string name, std::string anchor, double residual, double min_value);
  static Record check(std::string name, std::string anchor, bool ok, std::string verdict);
  void set_tolerance(double tol);
};

struct Report {
  std::string command;
  nlohmann::ordered_json config;
  std::vector<Record> records;
  nlohmann::ordered_json result;  // command-specific output (eval-kbessel, orbit-int)
  nlohmann::ordered_json table;   // optional tabular payload (rows of objects)
  std::vector<std::string> table_columns;
  double wall_time = 0;
  std::string timestamp;

  bool all_pass() const;
  nlohmann::ordered_json to_json() const;
};

std::string csv_field(const std::string& s);
std::string csv_number(double v);
void write_records_csv(std::ostream& os, const std::vector<Record>& records);
void write_table_csv(std::ostream& os, const std::vector<std::string>& columns, const nlohmann::ordered_json& rows);

}  // namespace jb::cli
