// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridsure/grid/io.hpp"
#include "gridsure/pipeline/pipeline.hpp"

using namespace gridsure;
using namespace gridsure::pipeline;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = GRIDSURE_FIXTURE_DIR;
const std::string kCli = GRIDSURE_CLI_PATH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// report comparison with timing fields removed
nlohmann::json strip_timings(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  j.erase("timings");
  // the worker count is part of the config echo and differs by construction
  j["config"].erase("worker_count");
  return j;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const fs::path tmp = fs::temp_directory_path() / "gridsure_cli_out.txt";
  const std::string cmd = kCli + " " + args + " > " + tmp.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (out != nullptr) *out = slurp(tmp);
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("pipeline produces a complete, internally consistent report") {
  PipelineConfig cfg;
  cfg.network_path = kFixtures + "/network4.json";
  cfg.smp_spec_path = kFixtures + "/smp_paper.json";
  cfg.mc_samples = 40;
  cfg.master_seed = 7;
  cfg.worker_count = 2;
  cfg.worst_case_restarts = 2;
  cfg.output_dir = "pipeline_test_out";
  fs::remove_all(cfg.output_dir);

  const PipelineReport rep = run_pipeline(cfg);
  CHECK(rep.nominal_cost > 0);
  CHECK(rep.worst_case_cost > rep.nominal_cost);
  CHECK(rep.alpha_used == doctest::Approx(rep.smp_result.p_fail));
  CHECK(rep.risk.premium_normalized ==
        doctest::Approx(rep.alpha_used * rep.risk.tvar_normalized).epsilon(1e-12));
  CHECK(rep.fit.source == pricing::FitSource::McPlusWorstCase);

  for (const char* f : {"report.json", "samples.csv", "dispatch.csv", "summary.txt",
                        "smp.json", "fit.json", "worstcase.json"}) {
    CHECK_MESSAGE(fs::exists(fs::path(cfg.output_dir) / f), f);
  }
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("pipeline determinism: identical outputs for worker counts 1 and 8") {
  PipelineConfig cfg;
  cfg.network_path = kFixtures + "/network4.json";
  cfg.smp_spec_path = kFixtures + "/smp_paper.json";
  cfg.mc_samples = 32;
  cfg.master_seed = 99;
  cfg.worst_case_restarts = 1;

  cfg.output_dir = "pipe_det_a";
  cfg.worker_count = 1;
  fs::remove_all(cfg.output_dir);
  run_pipeline(cfg);

  cfg.output_dir = "pipe_det_b";
  cfg.worker_count = 8;
  fs::remove_all(cfg.output_dir);
  run_pipeline(cfg);

  CHECK(slurp("pipe_det_a/samples.csv") == slurp("pipe_det_b/samples.csv"));
  CHECK(strip_timings(slurp("pipe_det_a/report.json")) ==
        strip_timings(slurp("pipe_det_b/report.json")));
  fs::remove_all("pipe_det_a");
  fs::remove_all("pipe_det_b");
}

TEST_CASE("degenerate single-sample pipeline warns and prices at zero") {
  PipelineConfig cfg;
  cfg.network_path = kFixtures + "/network4.json";
  cfg.mc_samples = 1;
  cfg.master_seed = 7;
  cfg.worst_case_restarts = 0;
  cfg.alpha_override = 0.05;
  cfg.convention = pricing::Convention::PaperLiteral;
  cfg.output_dir = "pipe_degen";
  fs::remove_all(cfg.output_dir);

  // zero variation: every sample equals nominal
  // (delta is taken from the network file; patch it via a rewritten copy)
  nlohmann::json net = nlohmann::json::parse(slurp(kFixtures + "/network4.json"));
  net["policy"]["delta_bus"] = 0.0;
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream out(fs::path(cfg.output_dir) / "net.json");
    out << net.dump();
  }
  cfg.network_path = (fs::path(cfg.output_dir) / "net.json").string();

  const PipelineReport rep = run_pipeline(cfg);
  CHECK(rep.fit.degenerate);
  CHECK(rep.fit.low_sample_warning);
  CHECK(std::abs(rep.risk.premium_normalized) < 1e-6);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("pipeline resume reuses completed stages") {
  PipelineConfig cfg;
  cfg.network_path = kFixtures + "/network4.json";
  cfg.smp_spec_path = kFixtures + "/smp_paper.json";
  cfg.mc_samples = 24;
  cfg.master_seed = 3;
  cfg.worst_case_restarts = 1;
  cfg.output_dir = "pipe_resume";
  fs::remove_all(cfg.output_dir);
  const PipelineReport first = run_pipeline(cfg);

  cfg.resume = true;
  const PipelineReport second = run_pipeline(cfg);
  CHECK(second.resumed_stages.size() == 2);  // monte_carlo and worst_case
  CHECK(second.worst_case_cost == doctest::Approx(first.worst_case_cost));
  // stage outputs round-trip through CSV at 12 significant digits
  CHECK(second.risk.premium_normalized ==
        doctest::Approx(first.risk.premium_normalized).epsilon(1e-9));
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("missing inputs are input errors") {
  PipelineConfig cfg;
  cfg.network_path = "no_such_network.json";
  cfg.mc_samples = 1;
  cfg.alpha_override = 0.05;
  cfg.output_dir = "pipe_missing";
  CHECK_THROWS_AS(run_pipeline(cfg), ParseError);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("stage failure leaves a partial report naming the stage") {
  // voltage window no dispatch can satisfy
  nlohmann::json net = nlohmann::json::parse(slurp(kFixtures + "/network4.json"));
  net["policy"]["v_min"] = 0.9999;
  net["policy"]["v_max"] = 1.0001;
  net["policy"]["curtail_fraction_max"] = 0.0;
  const std::string dir = "pipe_failed";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "net.json");
    out << net.dump();
  }
  PipelineConfig cfg;
  cfg.network_path = dir + "/net.json";
  cfg.mc_samples = 4;
  cfg.alpha_override = 0.05;
  cfg.output_dir = dir;
  CHECK_THROWS_AS(run_pipeline(cfg), InfeasibleError);
  const nlohmann::json rep = nlohmann::json::parse(slurp(fs::path(dir) / "report.json"));
  CHECK(rep.at("failed_stage").get<std::string>() == "opf_nominal");
  CHECK(!rep.at("error").get<std::string>().empty());
  fs::remove_all(dir);
}

// --- CLI <-> library equivalence and exit codes ----------------------------

TEST_CASE("cli: opf output matches the library cost") {
  std::string out;
  const int rc = run_cli("--out cli_opf_out opf " + kFixtures + "/network4.json", &out);
  CHECK(rc == 0);
  const grid::NetworkModel m = grid::load_network(kFixtures + "/network4.json");
  const double cost = opf::solve_model(m).cost_total;
  std::ostringstream expect;
  expect.precision(6);
  expect << "C* = " << cost;
  CHECK(out.find(expect.str().substr(0, 12)) != std::string::npos);
  CHECK(fs::exists("cli_opf_out/dispatch.csv"));
  fs::remove_all("cli_opf_out");
}

TEST_CASE("cli: smp prints the failure probability") {
  std::string out;
  const int rc = run_cli("smp " + kFixtures + "/smp_paper.json", &out);
  CHECK(rc == 0);
  CHECK(out.find("P_F=") == 0);
  const smp::SmpResult r = smp::failure_probability(
      smp::load_smp_spec(kFixtures + "/smp_paper.json"));
  std::ostringstream expect;
  expect.precision(6);
  expect << "P_F=" << r.p_fail;
  CHECK(out.substr(0, expect.str().size()) == expect.str());
}

TEST_CASE("cli: smp sweep emits csv") {
  std::string out;
  const int rc = run_cli("--out cli_sweep smp " + kFixtures +
                             "/smp_paper.json --sweep V-F 0.5 2.0 4",
                         &out);
  CHECK(rc == 0);
  CHECK(out.find("scale,p_fail") == 0);
  CHECK(fs::exists("cli_sweep/smp_sweep.csv"));
  fs::remove_all("cli_sweep");
}

TEST_CASE("cli: mc then price consumes the sample csv") {
  fs::remove_all("cli_mc");
  std::string out;
  int rc = run_cli("--out cli_mc --seed 5 mc " + kFixtures +
                       "/network4.json -n 64",
                   &out);
  CHECK(rc == 0);
  REQUIRE(fs::exists("cli_mc/samples.csv"));

  rc = run_cli("--format json price cli_mc/samples.csv --alpha 0.05 --nominal 62.33",
               &out);
  CHECK(rc == 0);
  const nlohmann::json j = nlohmann::json::parse(out);
  CHECK(j.at("alpha").get<double>() == doctest::Approx(0.05));
  CHECK(j.at("premium").at("normalized").get<double>() ==
        doctest::Approx(0.05 * j.at("tvar").at("normalized").get<double>()));
  fs::remove_all("cli_mc");
}

TEST_CASE("cli: laa reports nominal and attacked cost") {
  std::string out;
  const int rc = run_cli("laa " + kFixtures +
                             "/network4.json --buses 2,3 --hour 1 --scale 1.3",
                         &out);
  CHECK(rc == 0);
  CHECK(out.find("nominal  C* = ") != std::string::npos);
  CHECK(out.find("attacked C* = ") != std::string::npos);
}

TEST_CASE("cli: usage and config errors exit with code 2") {
  std::string out;
  CHECK(run_cli("opf no_such_file.json", &out) == 2);
  CHECK(run_cli("bogus_subcommand", &out) != 0);
  CHECK(run_cli("smp no_such_spec.json", &out) == 2);
}

TEST_CASE("cli: computational failures exit with code 1") {
  nlohmann::json net = nlohmann::json::parse(slurp(kFixtures + "/network4.json"));
  net["policy"]["v_min"] = 0.9999;
  net["policy"]["v_max"] = 1.0001;
  net["policy"]["curtail_fraction_max"] = 0.0;
  fs::create_directories("cli_infeasible");
  {
    std::ofstream f("cli_infeasible/net.json");
    f << net.dump();
  }
  std::string out;
  CHECK(run_cli("--out cli_infeasible opf cli_infeasible/net.json", &out) == 1);
  CHECK(out.find("violated constraint") != std::string::npos);
  fs::remove_all("cli_infeasible");
}

TEST_CASE("cli: opf --dump-lp writes a readable instance") {
  fs::remove_all("cli_dump");
  std::string out;
  const int rc = run_cli("--out cli_dump opf " + kFixtures +
                             "/network4.json --dump-lp cli_dump/instance.lp",
                         &out);
  CHECK(rc == 0);
  const std::string text = slurp("cli_dump/instance.lp");
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Generals") != std::string::npos);  // battery mode binaries
  CHECK(text.find("End") != std::string::npos);
  fs::remove_all("cli_dump");
}
