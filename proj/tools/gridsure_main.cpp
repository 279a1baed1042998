// SPDX-License-Identifier: Apache-2.0
//
// gridsure — command-line front end. One subcommand per pipeline stage plus
// the full pipeline; every output a subcommand prints is byte-identical to
// the corresponding library call's serialization.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gridsure/grid/io.hpp"
#include "gridsure/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gridsure;

namespace {

struct CommonFlags {
  std::string out_dir = ".";
  std::string format = "text";  // json, csv, text
  std::uint64_t seed = 1;
  int jobs = 0;  // 0: GRIDSURE_JOBS or 1
};

int effective_jobs(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("GRIDSURE_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path().empty() ? "." : p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
}

std::vector<Real> read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open samples CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("samples CSV is empty");
  // accept both the full sample schema and a bare one-column file
  std::vector<std::string> header;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) header.push_back(cell);
  }
  int norm_col = -1, status_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "cost_normalized") norm_col = static_cast<int>(c);
    if (header[c] == "status") status_col = static_cast<int>(c);
  }
  std::vector<Real> xs;
  if (norm_col < 0) {
    // headerless single column; first line was already a number?
    try {
      xs.push_back(std::stod(header.at(0)));
      norm_col = 0;
    } catch (const std::exception&) {
      throw ParseError("samples CSV needs a cost_normalized column");
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (status_col >= 0 && cells.at(status_col) != "optimal") continue;
    xs.push_back(std::stod(cells.at(norm_col)));
  }
  return xs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cyber-insurance pricing toolkit for distribution grids"};
  app.require_subcommand(1);
  CommonFlags common;
  app.add_option("--out", common.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", common.format, "output format: json|csv|text")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  app.add_option("--seed", common.seed, "master random seed")->capture_default_str();
  app.add_option("--jobs", common.jobs, "worker threads (default GRIDSURE_JOBS or 1)");

  // --- opf -------------------------------------------------------------
  auto* opf_cmd = app.add_subcommand("opf", "solve the dispatch problem");
  std::string opf_network;
  std::string dump_lp_path;
  std::string opf_scenario;
  opf_cmd->add_option("network", opf_network, "network config file")->required();
  opf_cmd->add_option("--dump-lp", dump_lp_path, "write the instance in LP format");
  opf_cmd->add_option("--scenario", opf_scenario,
                      "replay a stored load scenario (JSON) on top of the nominal demand");

  // --- mc --------------------------------------------------------------
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo operational-cost sampling");
  std::string mc_network;
  long mc_n = 1000;
  mc_cmd->add_option("network", mc_network, "network config file")->required();
  mc_cmd->add_option("-n,--samples", mc_n, "number of scenarios")->capture_default_str();

  // --- worstcase ---------------------------------------------------------
  auto* wc_cmd = app.add_subcommand("worstcase", "bi-level worst-case variation");
  std::string wc_network;
  int wc_restarts = 8;
  wc_cmd->add_option("network", wc_network, "network config file")->required();
  wc_cmd->add_option("--restarts", wc_restarts, "random restarts")->capture_default_str();

  // --- smp ---------------------------------------------------------------
  auto* smp_cmd = app.add_subcommand("smp", "semi-Markov failure probability");
  std::string smp_path;
  std::vector<std::string> sweep_args;
  std::string smp_convention = "survival_product";
  smp_cmd->add_option("spec", smp_path, "SMP spec file")->required();
  smp_cmd->add_option("--sweep", sweep_args,
                      "<transition> <lo> <hi> <n>: sweep the scale parameter")
      ->expected(4);
  smp_cmd->add_option("--sojourn-convention", smp_convention,
                      "survival_product|density_weighted")
      ->check(CLI::IsMember({"survival_product", "density_weighted"}))
      ->capture_default_str();

  // --- price ---------------------------------------------------------------
  auto* price_cmd = app.add_subcommand("price", "fit samples and price the policy");
  std::string price_samples;
  double price_alpha = 0.0398;
  std::string price_convention = "standard_cte";
  std::optional<double> price_worst;
  double price_nominal = 1.0;
  bool price_curve = false;
  price_cmd->add_option("samples", price_samples, "samples CSV (cost_normalized column)")
      ->required();
  price_cmd->add_option("--alpha", price_alpha, "confidence level")->capture_default_str();
  price_cmd->add_option("--convention", price_convention, "standard_cte|paper_literal")
      ->check(CLI::IsMember({"standard_cte", "paper_literal"}))
      ->capture_default_str();
  price_cmd->add_option("--worst-case", price_worst,
                        "normalized worst-case cost appended to the fit");
  price_cmd->add_option("--nominal", price_nominal, "nominal cost for currency scaling")
      ->capture_default_str();
  price_cmd->add_flag("--curve", price_curve, "emit an (alpha, VaR, TVaR, premium) CSV");

  // --- laa -------------------------------------------------------------------
  auto* laa_cmd = app.add_subcommand("laa", "load-altering attack what-if");
  std::string laa_network;
  std::string laa_buses;
  int laa_hour = 20;
  double laa_scale = 1.3;
  laa_cmd->add_option("network", laa_network, "network config file")->required();
  laa_cmd->add_option("--buses", laa_buses, "comma-separated victim bus ids")->required();
  laa_cmd->add_option("--hour", laa_hour, "attack hour")->capture_default_str();
  laa_cmd->add_option("--scale", laa_scale, "demand multiplier")->capture_default_str();

  // --- pipeline -----------------------------------------------------------
  auto* pipe_cmd = app.add_subcommand("pipeline", "full insurance workflow");
  pipeline::PipelineConfig pcfg;
  std::string pipe_convention = "standard_cte";
  std::optional<double> pipe_alpha;
  pipe_cmd->add_option("network", pcfg.network_path, "network config file")->required();
  pipe_cmd->add_option("--smp", pcfg.smp_spec_path, "SMP spec file");
  pipe_cmd->add_option("-n,--samples", pcfg.mc_samples, "Monte Carlo scenarios")
      ->capture_default_str();
  pipe_cmd->add_option("--alpha", pipe_alpha, "override the SMP-derived confidence");
  pipe_cmd->add_option("--convention", pipe_convention, "standard_cte|paper_literal")
      ->check(CLI::IsMember({"standard_cte", "paper_literal"}))
      ->capture_default_str();
  pipe_cmd->add_option("--restarts", pcfg.worst_case_restarts, "worst-case restarts")
      ->capture_default_str();
  pipe_cmd->add_option("--worst-case-weight", pcfg.worst_case_weight,
                       "fit weight of the bi-level point")
      ->capture_default_str();
  bool pipe_resume = false;
  pipe_cmd->add_flag("--resume", pipe_resume, "reuse completed stage outputs");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out_dir(common.out_dir);

    if (opf_cmd->parsed()) {
      const grid::NetworkModel model = grid::load_network(opf_network);
      std::optional<opf::DemandOverride> override;
      if (!opf_scenario.empty()) {
        std::ifstream in(opf_scenario);
        if (!in) throw ParseError("cannot open scenario file '" + opf_scenario + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        override = scenario::apply_scenario(model, scenario::scenario_from_json(buf.str()));
      }
      opf::OpfProblem problem = opf::build_opf(model, override);
      if (!dump_lp_path.empty()) write_file(dump_lp_path, lp::to_lp_format(problem.lp));
      opf::OpfSolveOptions opt;
      const lp::Basis crash = opf::crash_basis(problem);
      opt.lp.warm_basis = &crash;
      const opf::DispatchSolution sol = opf::solve_opf(problem, opt);
      write_file(out_dir / "dispatch.csv", opf::dispatch_to_csv(problem, sol));
      if (common.format == "json") {
        std::cout << opf::dispatch_to_json(problem, sol) << "\n";
      } else {
        std::cout << "C* = " << sol.cost_total << " (energy " << sol.cost_energy
                  << ", curtailment " << sol.cost_curtail << ")\n";
      }
      return 0;
    }

    if (mc_cmd->parsed()) {
      const grid::NetworkModel model = grid::load_network(mc_network);
      scenario::MonteCarloConfig cfg;
      cfg.samples = mc_n;
      cfg.master_seed = common.seed;
      cfg.jobs = effective_jobs(common.jobs);
      const scenario::MonteCarloResult result = scenario::run_monte_carlo(model, cfg);
      write_file(out_dir / "samples.csv", scenario::samples_to_csv(result));
      if (common.format == "csv")
        std::cout << scenario::samples_to_csv(result);
      else
        std::cout << scenario::samples_summary_json(result) << "\n";
      return 0;
    }

    if (wc_cmd->parsed()) {
      const grid::NetworkModel model = grid::load_network(wc_network);
      scenario::WorstCaseConfig cfg;
      cfg.restarts = wc_restarts;
      cfg.seed = common.seed;
      const scenario::WorstCaseResult result = scenario::worst_case(model, cfg);
      write_file(out_dir / "worstcase_scenario.json",
                 scenario::scenario_to_json(result.scenario));
      std::cout << "C' = " << result.cost << " (nominal " << result.nominal_cost
                << ", +" << 100.0 * (result.cost / result.nominal_cost - 1.0)
                << "%), certified=" << (result.certified ? "true" : "false") << "\n";
      return 0;
    }

    if (smp_cmd->parsed()) {
      const smp::SmpSpec spec = smp::load_smp_spec(smp_path);
      const auto conv = smp_convention == "survival_product"
                            ? smp::SojournConvention::SurvivalProduct
                            : smp::SojournConvention::DensityWeighted;
      if (!sweep_args.empty()) {
        const smp::Transition tr = smp::transition_from_string(sweep_args[0]);
        const double lo = std::stod(sweep_args[1]);
        const double hi = std::stod(sweep_args[2]);
        const int n = std::stoi(sweep_args[3]);
        if (n < 2 || !(hi > lo) || lo <= 0)
          throw DomainError("smp --sweep: need n >= 2 and 0 < lo < hi");
        std::ostringstream csv;
        csv.precision(12);
        csv << "scale,p_fail\n";
        for (int k = 0; k < n; ++k) {
          smp::SmpSpec swept = spec;
          swept.at(tr).scale = lo + (hi - lo) * k / (n - 1);
          csv << swept.at(tr).scale << ','
              << smp::failure_probability(swept, conv).p_fail << '\n';
        }
        write_file(out_dir / "smp_sweep.csv", csv.str());
        std::cout << csv.str();
        return 0;
      }
      const smp::SmpResult result = smp::failure_probability(spec, conv);
      if (common.format == "json")
        std::cout << smp::smp_result_to_json(result) << "\n";
      else
        std::cout << "P_F=" << result.p_fail << "\n";
      return 0;
    }

    if (price_cmd->parsed()) {
      const std::vector<Real> xs = read_samples_csv(price_samples);
      std::optional<Real> worst;
      if (price_worst) worst = *price_worst;
      const pricing::FittedDistribution fit = pricing::fit_inverse_gaussian(xs, worst);
      const auto conv = pricing::convention_from_string(price_convention);
      if (price_curve) {
        std::vector<Real> alphas;
        for (int k = 1; k <= 40; ++k) alphas.push_back(0.005 * k);
        const std::string csv =
            pricing::risk_curve_csv(fit, alphas, price_nominal, conv);
        write_file(out_dir / "risk_curve.csv", csv);
        std::cout << csv;
        return 0;
      }
      const pricing::RiskReport report =
          pricing::price_policy(fit, price_alpha, price_nominal, conv);
      if (common.format == "json")
        std::cout << pricing::risk_report_to_json(report) << "\n";
      else
        std::cout << pricing::risk_report_summary(report);
      return 0;
    }

    if (laa_cmd->parsed()) {
      const grid::NetworkModel model = grid::load_network(laa_network);
      std::vector<int> ids;
      std::istringstream ls(laa_buses);
      std::string cell;
      while (std::getline(ls, cell, ',')) ids.push_back(std::stoi(cell));
      const scenario::LoadScenario attack =
          scenario::apply_laa(model, ids, laa_hour, laa_scale);
      const Real nominal = opf::solve_model(model).cost_total;
      const Real attacked =
          opf::solve_model(model, scenario::apply_scenario(model, attack)).cost_total;
      std::cout << "nominal  C* = " << nominal << "\n"
                << "attacked C* = " << attacked << " (+"
                << 100.0 * (attacked / nominal - 1.0) << "%)\n";
      return 0;
    }

    if (pipe_cmd->parsed()) {
      pcfg.master_seed = common.seed;
      pcfg.worker_count = effective_jobs(common.jobs);
      pcfg.output_dir = common.out_dir;
      pcfg.convention = pricing::convention_from_string(pipe_convention);
      pcfg.resume = pipe_resume;
      if (pipe_alpha) pcfg.alpha_override = *pipe_alpha;
      const pipeline::PipelineReport report = pipeline::run_pipeline(pcfg);
      std::cout << pipeline::report_summary(report);
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
