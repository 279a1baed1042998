// SPDX-License-Identifier: Apache-2.0
//
// End-to-end orchestration: network -> nominal dispatch -> Monte Carlo ->
// worst case -> semi-Markov failure probability -> distribution fit ->
// premium. Every stage's artifacts land in the output directory; a state
// file makes completed stages resumable.
#ifndef GRIDSURE_PIPELINE_PIPELINE_HPP
#define GRIDSURE_PIPELINE_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "gridsure/pricing/pricing.hpp"
#include "gridsure/scenario/scenario.hpp"
#include "gridsure/smp/smp.hpp"

namespace gridsure::pipeline {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  std::string network_path;
  std::string smp_spec_path;
  long mc_samples = 1000;
  std::uint64_t master_seed = 1;
  std::optional<Real> alpha_override;  // default: the SMP failure probability
  pricing::Convention convention = pricing::Convention::StandardCte;
  smp::SojournConvention smp_convention = smp::SojournConvention::SurvivalProduct;
  int worker_count = 1;
  std::string output_dir = ".";
  int worst_case_restarts = 4;
  Real worst_case_weight = 1.0;  // weight of the bi-level point in the fit
  bool resume = false;           // reuse completed stage outputs if present
};

struct StageTiming {
  std::string stage;
  double seconds = 0;
};

struct PipelineReport {
  Real nominal_cost = 0;
  long mc_samples = 0;
  long mc_infeasible = 0;
  Real mc_mean_normalized = 0;
  Real worst_case_cost = 0;
  Real worst_case_normalized = 0;
  bool worst_case_certified = true;
  smp::SmpResult smp_result;
  pricing::FittedDistribution fit;
  pricing::RiskReport risk;
  Real alpha_used = 0;
  std::vector<StageTiming> timings;
  std::vector<std::string> resumed_stages;
};

/// Runs all stages, writing report.json, samples.csv, dispatch.csv and
/// summary.txt under config.output_dir. Alpha defaults to the SMP failure
/// probability unless overridden.
PipelineReport run_pipeline(const PipelineConfig& config);

std::string report_to_json(const PipelineConfig& config, const PipelineReport& report);
std::string report_summary(const PipelineReport& report);

}  // namespace gridsure::pipeline

#endif  // GRIDSURE_PIPELINE_PIPELINE_HPP
