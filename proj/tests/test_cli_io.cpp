#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hydrosddp/commands.hpp"
#include "hydrosddp/config.hpp"
#include "hydrosddp/csv.hpp"
#include "hydrosddp/loader.hpp"
#include "hydrosddp/report.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace hydrosddp;
namespace fs = std::filesystem;

namespace {

const fs::path kSample = HYDROSDDP_SAMPLE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hydrosddp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Sample config with data paths made absolute and a JSON edit applied.
fs::path edited_config(const fs::path& dir, const std::function<void(nlohmann::json&)>& edit) {
  nlohmann::json j = nlohmann::json::parse(slurp(kSample / "config.json"));
  for (auto& [key, value] : j["data"].items()) value = (kSample / value.get<std::string>()).string();
  edit(j);
  spit(dir / "config.json", j.dump(2));
  return dir / "config.json";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HYDROSDDP_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int count_lines(const std::string& text) { return static_cast<int>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("duration curve of [5, 1, 3]") {
  const auto curve = duration_curve({5.0, 1.0, 3.0});
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].value == 5.0);
  CHECK(curve[1].value == 3.0);
  CHECK(curve[2].value == 1.0);
  CHECK(curve[0].exceedance == doctest::Approx(1.0 / 3.0));
  CHECK(curve[2].exceedance == doctest::Approx(1.0));
  const auto weighted = duration_curve({5.0, 1.0, 3.0}, {1.0, 2.0, 1.0});
  CHECK(weighted[1].exceedance == doctest::Approx(0.5));
  CHECK(percentile({4.0, 1.0, 2.0, 3.0}, 50.0) == doctest::Approx(2.5));
  CHECK(percentile({4.0, 1.0, 2.0, 3.0}, 90.0) == doctest::Approx(3.7));
}

TEST_CASE("csv parsing and number formatting") {
  const CsvTable t = CsvTable::parse("a,b\n# comment\n\n1,x\n2.5,y\n", "mem.csv");
  CHECK(t.num_rows() == 2);
  CHECK(t.number(1, "a") == 2.5);
  CHECK(t.text(0, "b") == "x");
  CHECK(t.line(1) == 5);
  CHECK(t.number_or(0, "c", 7.0) == 7.0);
  CHECK_THROWS_AS(CsvTable::parse("a,b\n1\n", "bad.csv"), InputError);
  CHECK_THROWS_AS(t.number(0, "b"), InputError);
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(2e9) == "2e+09");
}

TEST_CASE("a 167-hour week is rejected with its location") {
  const fs::path dir = scratch("short_week");
  std::string demand = slurp(kSample / "demand.csv");
  // Drop week 2, hour 100.
  const std::string row = "\n2,100,";
  const auto at = demand.find(row);
  REQUIRE(at != std::string::npos);
  demand.erase(at, demand.find('\n', at + 1) - at);
  spit(dir / "demand.csv", demand);
  const fs::path cfg = edited_config(dir, [&](nlohmann::json& j) { j["data"]["demand"] = (dir / "demand.csv").string(); });
  try {
    load_system(load_config(cfg));
    FAIL("expected InputError");
  } catch (const InputError& e) {
    const std::string what = e.what();
    CHECK(what.find("week 2 has 167 hours") != std::string::npos);
    CHECK(what.find("demand.csv") != std::string::npos);
  }
}

TEST_CASE("config errors name the offending key") {
  const fs::path dir = scratch("bad_config");
  CHECK_THROWS_AS(parse_config("{", dir), InputError);
  try {
    parse_config(R"({"data": {"demand": "d.csv"}, "nodes": ["A"], "blocks": {"hours": [168]}, "shedding": [],
                     "training": {"iterations": "many"}})",
                 dir);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("training.iterations") != std::string::npos);
  }
  const fs::path cfg = edited_config(dir, [](nlohmann::json& j) { j["blocks"]["hours"] = {100, 60}; });
  CHECK_THROWS_AS(load_system(load_config(cfg)), InputError);
}

TEST_CASE("write_system round-trips the loaded data") {
  const RunConfig config = load_config(kSample / "config.json");
  const LoadedSystem a = load_system(config);
  const fs::path dir = scratch("round_trip");
  const RunConfig written = write_system(a, config, dir);
  const LoadedSystem b = load_system(written);
  const SystemData& s = a.system;
  const SystemData& t = b.system;
  REQUIRE(s.num_weeks() == t.num_weeks());
  for (int w = 0; w < s.num_weeks(); ++w) {
    CHECK(s.weeks[w].demand == t.weeks[w].demand);
    CHECK(s.weeks[w].hours == t.weeks[w].hours);
  }
  REQUIRE(s.inflows.size() == t.inflows.size());
  for (std::size_t y = 0; y < s.inflows.size(); ++y) {
    for (int w = 0; w < s.num_weeks(); ++w) CHECK(s.inflows[y][w] == t.inflows[y][w]);
  }
  REQUIRE(s.hydro.size() == t.hydro.size());
  for (std::size_t k = 0; k < s.hydro.size(); ++k) {
    CHECK(s.hydro[k].flow_capacity == t.hydro[k].flow_capacity);
    CHECK(s.hydro[k].specific_power == t.hydro[k].specific_power);
    CHECK(s.hydro[k].from == t.hydro[k].from);
  }
  REQUIRE(s.wind.size() == t.wind.size());
  for (std::size_t k = 0; k < s.wind.size(); ++k) {
    for (int w = 0; w < s.num_weeks(); ++w) CHECK(s.wind[k].mu[w] == t.wind[k].mu[w]);
  }
  CHECK(s.fixed_generation == t.fixed_generation);
  CHECK(s.reservoirs[1].minimum == t.reservoirs[1].minimum);
}

TEST_CASE("train writes cadence rows; policy and log are reproducible") {
  RunConfig config = load_config(kSample / "config.json");
  CommandOptions opt;
  opt.iterations = 6;
  opt.eval_cadence = 2;
  opt.reproducible = true;
  config = apply_overrides(config, opt);
  std::ostringstream log;

  opt.out = scratch("train_a");
  const Policy pa = cmd_train(config, opt, log);
  const std::string inv = slurp(opt.out / "investments.csv");
  CHECK(count_lines(inv) == 4);
  CHECK(inv.rfind("iteration,lower_bound,wind,green,hvdc_upgrade\n", 0) == 0);
  CHECK(inv.find("\n2,") != std::string::npos);
  CHECK(inv.find("\n6,") != std::string::npos);
  const std::string policy_a = slurp(opt.out / "policy.json");
  const std::string log_a = slurp(opt.out / "training_log.csv");
  CHECK(count_lines(log_a) == 7);

  opt.out = scratch("train_b");
  cmd_train(config, opt, log);
  CHECK(slurp(opt.out / "policy.json") == policy_a);
  CHECK(slurp(opt.out / "training_log.csv") == log_a);

  // Policy files reload into the same problem and refuse a different one.
  const LoadedSystem loaded = load_system(config);
  const Problem problem = build_problem(loaded, config);
  const Policy back = load_policy(opt.out / "policy.json", problem);
  CHECK(back.total_cuts() == pa.total_cuts());
  CHECK(lower_bound(problem, back) == doctest::Approx(pa.log.back().lower_bound).epsilon(1e-12));
  RunConfig smaller = config;
  smaller.investment.candidates.pop_back();
  const Problem other = build_problem(load_system(smaller), smaller);
  CHECK_THROWS_AS(load_policy(opt.out / "policy.json", other), TrainingError);

  // Simulation report files.
  cmd_simulate(config, opt, log);
  for (const char* f : {"simulation_stages.csv", "simulation_bands.csv", "simulation_summary.csv", "shedding_duration.csv"}) {
    CHECK(fs::exists(opt.out / f));
  }
  CHECK(count_lines(slurp(opt.out / "simulation_summary.csv")) == 32);
}

TEST_CASE("enumeration trains every grid point with the same settings") {
  RunConfig config = load_config(kSample / "config.json");
  config.training.iterations = 3;
  const LoadedSystem loaded = load_system(config);
  const EnumerationResult r = enumerate_investments(loaded, config, {{"green", {0.0, 100.0}}}, 2);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1].capacity(1) == 100.0);
  CHECK(r.rows[1].capacity(0) == 0.0);
  CHECK(r.rows[1].capex == doctest::Approx(100.0 * 600000.0));
  CHECK(r.rows[0].total == doctest::Approx(r.rows[0].opex));
  const EnumerationResult serial = enumerate_investments(loaded, config, {{"green", {0.0, 100.0}}}, 1);
  CHECK(serial.rows[1].opex == r.rows[1].opex);
  CHECK_THROWS_AS(enumerate_investments(loaded, config, {{"nuclear", {1.0}}}), InputError);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  const std::string cfg = (kSample / "config.json").string();
  const std::string out = " --out " + dir.string();
  CHECK(run_cli("linearize-wind --config " + cfg + out) == 0);
  CHECK(fs::exists(dir / "wind_slopes.csv"));
  CHECK(run_cli("linearize-wind --config /nonexistent.json" + out) == 2);
  CHECK(run_cli("nonsense --config " + cfg) == 2);
  CHECK(run_cli("train --config " + cfg + out + " --iterations 0") == 2);

  const fs::path broken = scratch("cli_broken");
  const fs::path bad = edited_config(broken, [](nlohmann::json& j) { j["shedding"][0]["fraction"] = 0.01; j["shedding"].erase(1); });
  CHECK(run_cli("train --config " + bad.string() + " --out " + broken.string() + " --iterations 1") == 2);

  CHECK(run_cli("train --config " + cfg + out + " --iterations 2 --seed 3") == 0);
  CHECK(run_cli("bound --config " + cfg + out) == 0);
  // A policy trained for a different state layout is a training error.
  const fs::path fewer = edited_config(scratch("cli_fewer"), [](nlohmann::json& j) {
    j["investment"]["candidates"].erase(2);
    j["enumeration"].erase("hvdc_upgrade");
  });
  CHECK(run_cli("simulate --config " + fewer.string() + out) == 3);
}
