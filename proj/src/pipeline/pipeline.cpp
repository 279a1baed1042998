// SPDX-License-Identifier: Apache-2.0
#include "gridsure/pipeline/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridsure/grid/io.hpp"

namespace gridsure::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError("cannot open '" + p.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stage outputs are only reusable for an identical configuration and inputs.
std::uint64_t config_hash(const PipelineConfig& c) {
  std::uint64_t h = fnv1a(read_file(c.network_path));
  if (!c.smp_spec_path.empty()) h = fnv1a(read_file(c.smp_spec_path), h);
  std::ostringstream os;
  os << c.mc_samples << '|' << c.master_seed << '|'
     << pricing::to_string(c.convention) << '|'
     << (c.smp_convention == smp::SojournConvention::SurvivalProduct ? "sp" : "dw")
     << '|' << c.worst_case_restarts << '|' << c.worst_case_weight << '|'
     << (c.alpha_override ? std::to_string(*c.alpha_override) : "smp");
  return fnv1a(os.str(), h);
}

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageClock() {
    const auto stop = std::chrono::steady_clock::now();
    sink_.push_back({name_, std::chrono::duration<double>(stop - start_).count()});
  }

 private:
  std::vector<StageTiming>& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

PipelineReport run_stages(const PipelineConfig& config, PipelineReport& rep,
                          std::string& current_stage, const fs::path& out_dir,
                          json& state);

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& config) {
  if (config.mc_samples < 1) throw DomainError("pipeline: mc_samples must be >= 1");
  if (config.alpha_override &&
      !(*config.alpha_override > 0 && *config.alpha_override < 1))
    throw DomainError("pipeline: alpha_override must be in (0, 1)");

  fs::create_directories(config.output_dir);
  const fs::path out_dir(config.output_dir);
  const std::uint64_t chash = config_hash(config);

  // stage ledger for --resume
  json state;
  const fs::path state_path = out_dir / "pipeline_state.json";
  if (config.resume && fs::exists(state_path)) {
    try {
      state = json::parse(read_file(state_path));
      if (state.value("config_hash", 0ULL) != chash) state = json::object();
    } catch (const std::exception&) {
      state = json::object();
    }
  }
  state["config_hash"] = chash;
  state["version"] = kVersion;

  PipelineReport rep;
  std::string current_stage = "load";
  try {
    return run_stages(config, rep, current_stage, out_dir, state);
  } catch (const std::exception& e) {
    // leave a partial report naming the failed stage before propagating
    try {
      json j = json::parse(report_to_json(config, rep));
      j["failed_stage"] = current_stage;
      j["error"] = e.what();
      write_file(out_dir / "report.json", j.dump(2));
    } catch (const std::exception&) {
    }
    throw;
  }
}

namespace {

PipelineReport run_stages(const PipelineConfig& config, PipelineReport& rep,
                          std::string& current_stage, const fs::path& out_dir,
                          json& state) {
  auto stage_done = [&](const std::string& name) {
    return state.contains("stages") && state["stages"].contains(name) &&
           state["stages"][name].get<bool>();
  };
  auto mark_done = [&](const std::string& name) {
    state["stages"][name] = true;
    write_file(out_dir / "pipeline_state.json", state.dump(2));
  };

  grid::NetworkModel model;
  {
    StageClock clock(rep.timings, "load");
    model = grid::load_network(config.network_path);
  }

  // nominal dispatch (also defines the normalization constant)
  {
    current_stage = "opf_nominal";
    StageClock clock(rep.timings, "opf_nominal");
    opf::OpfProblem problem = opf::build_opf(model);
    opf::OpfSolveOptions opt;
    const lp::Basis crash = opf::crash_basis(problem);
    opt.lp.warm_basis = &crash;
    const opf::DispatchSolution nominal = opf::solve_opf(problem, opt);
    rep.nominal_cost = nominal.cost_total;
    write_file(out_dir / "dispatch.csv", opf::dispatch_to_csv(problem, nominal));
  }

  // Monte Carlo
  std::vector<Real> mc_costs;
  {
    current_stage = "monte_carlo";
    StageClock clock(rep.timings, "monte_carlo");
    const fs::path samples_path = out_dir / "samples.csv";
    bool reused = false;
    if (config.resume && stage_done("monte_carlo") && fs::exists(samples_path)) {
      // reload normalized costs from the declared stage output
      std::ifstream in(samples_path);
      std::string line;
      std::getline(in, line);  // header
      long solved = 0, infeasible = 0;
      while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string id, seed, cost, norm, status;
        std::getline(ls, id, ',');
        std::getline(ls, seed, ',');
        std::getline(ls, cost, ',');
        std::getline(ls, norm, ',');
        std::getline(ls, status, ',');
        if (status == "optimal") {
          mc_costs.push_back(std::stod(norm));
          ++solved;
        } else {
          ++infeasible;
        }
      }
      if (solved + infeasible == config.mc_samples) {
        rep.mc_samples = solved + infeasible;
        rep.mc_infeasible = infeasible;
        rep.resumed_stages.push_back("monte_carlo");
        reused = true;
      } else {
        mc_costs.clear();
      }
    }
    if (!reused) {
      scenario::MonteCarloConfig mc;
      mc.samples = config.mc_samples;
      mc.master_seed = config.master_seed;
      mc.jobs = config.worker_count;
      const scenario::MonteCarloResult result = scenario::run_monte_carlo(model, mc);
      mc_costs = scenario::normalized_costs(result);
      rep.mc_samples = static_cast<long>(result.samples.size());
      rep.mc_infeasible = result.infeasible_count;
      write_file(samples_path, scenario::samples_to_csv(result));
      write_file(out_dir / "samples_summary.json", scenario::samples_summary_json(result));
      mark_done("monte_carlo");
    }
    if (mc_costs.empty())
      throw SolverError("pipeline: every Monte Carlo scenario was infeasible");
    Real mean = 0;
    for (Real x : mc_costs) mean += x;
    rep.mc_mean_normalized = mean / static_cast<Real>(mc_costs.size());
  }

  // worst case
  {
    current_stage = "worst_case";
    StageClock clock(rep.timings, "worst_case");
    const fs::path wc_path = out_dir / "worstcase.json";
    bool reused = false;
    if (config.resume && stage_done("worst_case") && fs::exists(wc_path)) {
      try {
        const json j = json::parse(read_file(wc_path));
        rep.worst_case_cost = j.at("cost").get<Real>();
        rep.worst_case_normalized = j.at("cost_normalized").get<Real>();
        rep.worst_case_certified = j.at("certified").get<bool>();
        rep.resumed_stages.push_back("worst_case");
        reused = true;
      } catch (const std::exception&) {
        reused = false;
      }
    }
    if (!reused) {
      scenario::WorstCaseConfig wc;
      wc.restarts = config.worst_case_restarts;
      wc.seed = config.master_seed;
      const scenario::WorstCaseResult result = scenario::worst_case(model, wc);
      rep.worst_case_cost = result.cost;
      rep.worst_case_normalized = result.cost / rep.nominal_cost;
      rep.worst_case_certified = result.certified;
      json j;
      j["schema_version"] = 1;
      j["cost"] = result.cost;
      j["cost_normalized"] = rep.worst_case_normalized;
      j["certified"] = result.certified;
      j["restart_costs"] = result.restart_costs;
      write_file(wc_path, j.dump(2));
      write_file(out_dir / "worstcase_scenario.json",
                 scenario::scenario_to_json(result.scenario));
      mark_done("worst_case");
    }
  }

  // semi-Markov failure probability
  {
    current_stage = "smp";
    StageClock clock(rep.timings, "smp");
    if (config.smp_spec_path.empty() && !config.alpha_override)
      throw DomainError("pipeline: need an SMP spec or an explicit alpha");
    if (!config.smp_spec_path.empty()) {
      const smp::SmpSpec spec = smp::load_smp_spec(config.smp_spec_path);
      rep.smp_result = smp::failure_probability(spec, config.smp_convention);
      write_file(out_dir / "smp.json", smp::smp_result_to_json(rep.smp_result));
    }
  }

  // fit and price
  {
    current_stage = "pricing";
    StageClock clock(rep.timings, "pricing");
    rep.fit = pricing::fit_inverse_gaussian(mc_costs, rep.worst_case_normalized,
                                            config.worst_case_weight);
    rep.alpha_used = config.alpha_override ? *config.alpha_override : rep.smp_result.p_fail;
    rep.risk = pricing::price_policy(rep.fit, rep.alpha_used, rep.nominal_cost,
                                     config.convention);
    write_file(out_dir / "fit.json", pricing::fit_to_json(rep.fit));
  }

  current_stage = "write_report";
  write_file(out_dir / "report.json", report_to_json(config, rep));
  write_file(out_dir / "summary.txt", report_summary(rep));
  mark_done("pipeline");
  return rep;
}

}  // namespace

std::string report_to_json(const PipelineConfig& config, const PipelineReport& rep) {
  json j;
  j["schema_version"] = 1;
  j["version"] = kVersion;
  j["config"] = {
      {"network", config.network_path},
      {"smp_spec", config.smp_spec_path},
      {"mc_samples", config.mc_samples},
      {"master_seed", config.master_seed},
      {"convention", pricing::to_string(config.convention)},
      {"worker_count", config.worker_count},
      {"worst_case_restarts", config.worst_case_restarts},
      {"worst_case_weight", config.worst_case_weight},
      {"alpha_override",
       config.alpha_override ? json(*config.alpha_override) : json(nullptr)},
  };
  j["nominal_cost"] = rep.nominal_cost;
  j["monte_carlo"] = {
      {"samples", rep.mc_samples},
      {"infeasible", rep.mc_infeasible},
      {"mean_normalized", rep.mc_mean_normalized},
  };
  j["worst_case"] = {
      {"cost", rep.worst_case_cost},
      {"normalized", rep.worst_case_normalized},
      {"certified", rep.worst_case_certified},
  };
  if (rep.smp_result.sojourn.size() > 0 && rep.smp_result.sojourn.sum() > 0)
    j["smp"] = json::parse(smp::smp_result_to_json(rep.smp_result));
  j["fit"] = json::parse(pricing::fit_to_json(rep.fit));
  j["alpha"] = rep.alpha_used;
  j["risk"] = json::parse(pricing::risk_report_to_json(rep.risk));
  json timings = json::array();
  for (const StageTiming& t : rep.timings)
    timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  j["timings"] = std::move(timings);
  j["resumed_stages"] = rep.resumed_stages;
  return j.dump(2);
}

std::string report_summary(const PipelineReport& rep) {
  std::ostringstream os;
  os.precision(6);
  os << "nominal daily cost      : " << rep.nominal_cost << "\n"
     << "Monte Carlo samples     : " << rep.mc_samples << " (" << rep.mc_infeasible
     << " infeasible)\n"
     << "mean normalized cost    : " << rep.mc_mean_normalized << "\n"
     << "worst-case cost         : " << rep.worst_case_cost << " ("
     << 100.0 * (rep.worst_case_normalized - 1.0) << "% above nominal"
     << (rep.worst_case_certified ? "" : ", uncertified") << ")\n"
     << "fit (inverse Gaussian)  : mu=" << rep.fit.mu() << " lambda=" << rep.fit.lambda()
     << (rep.fit.degenerate ? " [degenerate]" : "") << "\n"
     << "P_F / alpha             : " << rep.alpha_used << "\n"
     << pricing::risk_report_summary(rep.risk);
  return os.str();
}

}  // namespace gridsure::pipeline
