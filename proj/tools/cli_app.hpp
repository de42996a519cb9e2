#pragma once

#include "report.hpp"

#include "jbessel/quadrature.hpp"

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace jb::cli {

// Bad flags, unknown families, unreadable config: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string family;
  std::map<std::string, std::string> params;  // subcommand parameters, defaults filled in
  QuadratureSpec quad;
  std::map<std::string, double> tolerances;  // record name (or name prefix) -> tolerance
  std::string format = "json";
  std::string out;
  std::uint64_t seed = 1;

  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

const std::vector<std::string>& command_names();

// Runs one command; the report carries the echoed config but no timing.
Report execute(const RunConfig& cfg);
std::string render(const Report& report, const std::string& format);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jb::cli
