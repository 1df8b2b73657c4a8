#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "geoavg/problem.hpp"
#include "geoavg/serialize.hpp"

using namespace geoavg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GEOAVG_CLI_PATH;

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() /
          ("geoavg_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run_cli(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json default_instance_json() {
  json inst;
  inst["dim"] = 3;
  inst["spectrum"] = {1.0, 0.5, 0.25};
  inst["w_star"] = {1.0, -1.0, 0.5};
  inst["noise_sigma"] = 0.3;
  inst["covariate_law"] = "gaussian";
  return inst;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream(path) << j.dump(2);
}

}  // namespace

TEST_CASE("synth writes a loadable, deterministic dataset") {
  Workspace ws;
  write_json(ws.path("instance.json"), default_instance_json());
  const std::string base = "--config " + ws.path("instance.json") +
                           " --n 100 --seed 7 --out " + ws.path("data");
  REQUIRE(run_cli("synth " + base) == 0);
  const Dataset data = load_csv(ws.path("data.csv"));
  CHECK(data.size() == 100);
  CHECK(data.dim() == 3);

  const std::string first = read_file(ws.path("data.csv"));
  REQUIRE(run_cli("synth --config " + ws.path("instance.json") +
                  " --n 100 --seed 7 --out " + ws.path("data2")) == 0);
  CHECK(read_file(ws.path("data2.csv")) == first);
}

TEST_CASE("run reports zero risk for a noiseless optimum start") {
  Workspace ws;
  json config;
  json inst = default_instance_json();
  inst["noise_sigma"] = 0.0;
  config["instance"] = inst;
  config["sgd"] = {{"eta", 0.1}, {"w0", {1.0, -1.0, 0.5}}};
  config["scheme"] = {{"kind", "tail"}, {"tau", 50}};
  config["n"] = 200;
  config["reps"] = 5;
  config["seed"] = 3;
  config["output"] = ws.path("zero");
  write_json(ws.path("config.json"), config);
  REQUIRE(run_cli("run --config " + ws.path("config.json")) == 0);
  const json summary = json::parse(read_file(ws.path("zero_summary.json")));
  CHECK(summary.at("mean_excess_risk").get<double>() == 0.0);
  CHECK(summary.at("bound").is_null());  // no finite-time bound for tail
}

TEST_CASE("run is byte-deterministic and satisfies the bound on the default cell") {
  Workspace ws;
  json config;
  json inst;
  inst["dim"] = 4;
  inst["spectrum"] = {1.0, 0.5, 1.0 / 3.0, 0.25};
  inst["w_star"] = {1.0, 1.0, 1.0, 1.0};
  inst["noise_sigma"] = 0.5;
  config["instance"] = inst;
  config["sgd"] = {{"eta", 0.08}};
  config["scheme"] = {{"kind", "geometric"}, {"rho", 0.995}};
  config["n"] = 400;
  config["reps"] = 60;
  config["seed"] = 11;
  write_json(ws.path("config.json"), config);

  const std::string flags = "run --config " + ws.path("config.json") + " --out ";
  REQUIRE(run_cli(flags + ws.path("a")) == 0);
  REQUIRE(run_cli(flags + ws.path("b")) == 0);
  CHECK(read_file(ws.path("a_report.csv")) == read_file(ws.path("b_report.csv")));

  const json summary = json::parse(read_file(ws.path("a_summary.json")));
  CHECK(summary.at("bound").at("satisfied").get<bool>());
  const std::string csv = read_file(ws.path("a_report.csv"));
  CHECK(csv.rfind("lambda,gamma,n,excess_risk_mc,stderr,bound_total,"
                  "variance_term,bias_term_1,bias_term_2,satisfied\n",
                  0) == 0);
}

TEST_CASE("run surfaces bound violations of the preconditions as config errors") {
  Workspace ws;
  json config;
  config["instance"] = default_instance_json();
  config["sgd"] = {{"eta", 0.45}};  // above 1/(2 R^2) for this instance
  config["scheme"] = {{"kind", "uniform"}};
  config["n"] = 50;
  config["reps"] = 2;
  config["output"] = ws.path("x");
  write_json(ws.path("config.json"), config);
  CHECK(run_cli("run --config " + ws.path("config.json")) == 2);
}

TEST_CASE("divergent runs exit with code 3") {
  Workspace ws;
  json config;
  json inst = default_instance_json();
  config["instance"] = inst;
  config["sgd"] = {{"eta", 1e200}};
  config["scheme"] = {{"kind", "uniform"}};
  config["n"] = 100;
  config["reps"] = 1;
  config["output"] = ws.path("div");
  write_json(ws.path("config.json"), config);
  CHECK(run_cli("run --config " + ws.path("config.json")) == 3);
}

TEST_CASE("verify subcommand") {
  CHECK(run_cli("verify lemma1") == 0);
  CHECK(run_cli("verify prop3") == 0);
  CHECK(run_cli("verify nosuchsuite") == 2);
}

TEST_CASE("path outputs are identical across worker counts") {
  Workspace ws;
  json config;
  config["instance"] = default_instance_json();
  config["sgd"] = {{"eta", 0.1}};
  config["n"] = 3000;
  config["seed"] = 21;
  write_json(ws.path("config.json"), config);

  write_json(ws.path("instance.json"), default_instance_json());
  REQUIRE(run_cli("synth --config " + ws.path("instance.json") +
                  " --n 300 --seed 5 --out " + ws.path("val")) == 0);

  const std::string grid = "--lambda-grid 0 0.05 0.2 0.8 2.0";
  for (const int workers : {1, 4, 7}) {
    REQUIRE(run_cli("path --config " + ws.path("config.json") + " " + grid +
                    " --validation " + ws.path("val.csv") + " --workers " +
                    std::to_string(workers) + " --out " +
                    ws.path("w" + std::to_string(workers))) == 0);
  }
  const std::string base = read_file(ws.path("w1_path.csv"));
  CHECK(read_file(ws.path("w4_path.csv")) == base);
  CHECK(read_file(ws.path("w7_path.csv")) == base);

  // GEOAVG_THREADS only caps concurrency, never changes output bytes.
  REQUIRE(std::system(("GEOAVG_THREADS=2 " + kCli + " path --config " +
                       ws.path("config.json") + " " + grid + " --validation " +
                       ws.path("val.csv") + " --workers 8 --out " +
                       ws.path("capped") + " >/dev/null 2>&1")
                          .c_str()) == 0);
  CHECK(read_file(ws.path("capped_path.csv")) == base);
  const json s1 = json::parse(read_file(ws.path("w1_summary.json")));
  const json s4 = json::parse(read_file(ws.path("w4_summary.json")));
  CHECK(s1.at("selected_key") == s4.at("selected_key"));
}

TEST_CASE("path with the training data and the zero grid reproduces the plain fit") {
  Workspace ws;
  json inst = default_instance_json();
  inst["noise_sigma"] = 0.1;
  json config;
  config["instance"] = inst;
  config["sgd"] = {{"eta", 0.1}};
  config["n"] = 1000;
  config["seed"] = 33;
  write_json(ws.path("config.json"), config);
  write_json(ws.path("instance.json"), inst);
  REQUIRE(run_cli("synth --config " + ws.path("instance.json") +
                  " --n 200 --seed 33 --out " + ws.path("train")) == 0);
  REQUIRE(run_cli("path --config " + ws.path("config.json") +
                  " --lambda-grid 0 --validation " + ws.path("train.csv") +
                  " --out " + ws.path("pr")) == 0);

  // The single entry equals the uniform average of the stored trace.
  const IterateTrace trace =
      load_trace(ws.path("pr_trace.csv"), ws.path("pr_trace.json"));
  const VectorXd uniform = average(trace, AveragingScheme::uniform());
  const std::string csv = read_file(ws.path("pr_path.csv"));
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::vector<std::string> fields;
  std::string field;
  std::istringstream row_stream(row);
  while (std::getline(row_stream, field, ',')) fields.push_back(field);
  REQUIRE(fields.size() == 4 + 3);
  CHECK(fields[0] == "lambda");
  CHECK(fields[3] == "1");  // single entry is selected
  for (int i = 0; i < 3; ++i)
    CHECK(std::stod(fields[4 + i]) == doctest::Approx(uniform(i)).epsilon(1e-12));
}

TEST_CASE("tail path selects a positive tau when early iterates are biased") {
  Workspace ws;
  json inst;
  inst["dim"] = 4;
  inst["spectrum"] = {1.0, 1.0, 1.0, 1.0};
  inst["w_star"] = {3.0, -3.0, 3.0, 3.0};
  inst["noise_sigma"] = 0.05;
  json config;
  config["instance"] = inst;
  config["sgd"] = {{"eta", 0.25}};
  config["n"] = 2000;
  config["seed"] = 9;
  write_json(ws.path("config.json"), config);
  write_json(ws.path("instance.json"), inst);
  REQUIRE(run_cli("synth --config " + ws.path("instance.json") +
                  " --n 500 --seed 77 --out " + ws.path("val")) == 0);
  REQUIRE(run_cli("path --config " + ws.path("config.json") +
                  " --tau-grid 0 500 1000 1500 --validation " + ws.path("val.csv") +
                  " --out " + ws.path("tail")) == 0);
  const json summary = json::parse(read_file(ws.path("tail_summary.json")));
  CHECK(summary.at("key_kind") == "tau");
  CHECK(summary.at("selected_key").get<double>() > 0.0);
}

TEST_CASE("compare with duplicated schemes produces identical columns") {
  Workspace ws;
  json config;
  config["instance"] = default_instance_json();
  config["sgd"] = {{"eta", 0.1}};
  config["schemes"] = {{{"kind", "geometric"}, {"rho", 0.99}},
                       {{"kind", "geometric"}, {"rho", 0.99}},
                       {{"kind", "tail"}, {"tau", 100}}};
  config["n"] = 400;
  config["reps"] = 20;
  config["seed"] = 13;
  config["output"] = ws.path("cmp");
  write_json(ws.path("config.json"), config);
  REQUIRE(run_cli("compare --config " + ws.path("config.json")) == 0);
  const json summary = json::parse(read_file(ws.path("cmp_summary.json")));
  const auto& rows = summary.at("rows");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].at("mean_excess_risk") == rows[1].at("mean_excess_risk"));
  CHECK(rows[0].at("stderr") == rows[1].at("stderr"));
  CHECK(rows[0].at("mean_excess_risk") != rows[2].at("mean_excess_risk"));
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run") == 2);
  CHECK(run_cli("run --config /nonexistent/config.json") == 2);
}
