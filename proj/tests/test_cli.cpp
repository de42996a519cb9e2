#include "doctest.h"
#include "cli_app.hpp"
#include "oracles.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

using jb::cli::Report;
using jb::cli::RunConfig;
using nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "jbessel_cli");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = jb::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

json without_timing(json j) {
  j.erase("timing");
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("CSV quoting") {
    CHECK(jb::cli::csv_field("plain") == "plain");
    CHECK(jb::cli::csv_field("a,b") == "\"a,b\"");
    CHECK(jb::cli::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(jb::cli::csv_field("two\nlines") == "\"two\nlines\"");
    CHECK(std::stod(jb::cli::csv_number(0.1)) == 0.1);
  }

  TEST_CASE("eval-kbessel report") {
    auto o = run({"eval-kbessel", "--family", "sym:1", "--lambda", "0.5", "--t", "1"});
    CHECK(o.code == 0);
    json j = json::parse(o.out);
    for (const char* key : {"schema", "version", "command", "config", "records", "result", "all_pass", "timing"})
      CHECK(j.contains(key));
    CHECK(j["schema"] == "report_v1");
    CHECK(j["command"] == "eval-kbessel");
    CHECK(j["all_pass"] == true);
    CHECK(j["timing"].contains("wall_time_s"));
    CHECK(j["result"]["value"].get<double>() == doctest::Approx(oracle::macdonald(0.5, 1)).epsilon(1e-9));
    for (const auto& r : j["records"]) {
      CHECK(r.contains("name"));
      CHECK(r.contains("anchor"));
      CHECK(r.contains("residual"));
      CHECK(r.contains("tolerance"));
      CHECK(r.contains("pass"));
    }
  }

  TEST_CASE("reports match the stored golden files") {
    auto o = run({"eval-kbessel", "--family", "sym:1", "--lambda", "0.5", "--t", "1"});
    json golden = json::parse(slurp(std::string(JB_GOLDEN_DIR) + "/eval_kbessel_sym1.json"));
    CHECK(without_timing(json::parse(o.out)) == without_timing(golden));

    auto m = run({"measure-table", "--family", "rect:2x3"});
    CHECK(m.code == 0);
    CHECK(m.out == slurp(std::string(JB_GOLDEN_DIR) + "/measure_table_rect2x3.csv"));
  }

  TEST_CASE("identical runs give identical reports") {
    auto a = run({"check-identities", "--family", "spin:4", "--probes", "20", "--det-pairs", "10"});
    auto b = run({"check-identities", "--family", "spin:4", "--probes", "20", "--det-pairs", "10"});
    CHECK(a.code == 0);
    CHECK(without_timing(json::parse(a.out)) == without_timing(json::parse(b.out)));
  }

  TEST_CASE("config replay reproduces the run") {
    auto a = run({"ode-residual", "--family", "sym:2", "--k", "1", "--lambdas", "0,1"});
    json report = json::parse(a.out);
    RunConfig cfg = RunConfig::from_json(report);
    CHECK(json::parse(cfg.to_json().dump()) == report["config"]);
    Report again = jb::cli::execute(cfg);
    json j = again.to_json();
    CHECK(without_timing(j) == without_timing(report));
  }

  TEST_CASE("exit codes") {
    CHECK(run({"eval-kbessel", "--family", "nope:3"}).code == 2);
    CHECK(run({"no-such-command"}).code == 2);
    CHECK(run({"eval-kbessel", "--family", "sym:2", "--k", "9"}).code == 2);
    CHECK(run({"eval-kbessel", "--family", "sym:1", "--out", "/nonexistent-dir/x.json"}).code == 2);
    CHECK(run({"--version"}).code == 0);
    auto fail = run({"eval-kbessel", "--family", "sym:1", "--tol", "macdonald_closed_form=-1"});
    CHECK(fail.code == 1);
    CHECK(fail.err.find("FAIL") != std::string::npos);
  }

  TEST_CASE("every subcommand is listed") {
    const auto& names = jb::cli::command_names();
    CHECK(names.size() == 11);
    for (const char* n : {"check-identities", "tangency-scan", "measure-table", "eval-kbessel", "ode-residual",
                          "gamma-check", "spherical-check", "intertwiner-check", "symmetry-check", "norm-check",
                          "orbit-int"})
      CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
}
