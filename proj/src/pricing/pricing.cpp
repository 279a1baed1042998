// SPDX-License-Identifier: Apache-2.0
#include "gridsure/pricing/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace gridsure::pricing {

using dist::InverseGaussian;
using dist::inverse_gaussian_cdf;
using dist::inverse_gaussian_quantile;
using dist::inverse_gaussian_tail_ev;

const char* to_string(Convention c) {
  return c == Convention::StandardCte ? "standard_cte" : "paper_literal";
}

Convention convention_from_string(const std::string& name) {
  if (name == "standard_cte" || name == "standard" || name == "cte")
    return Convention::StandardCte;
  if (name == "paper_literal" || name == "literal")
    return Convention::PaperLiteral;
  throw ParseError("unknown convention '" + name +
                   "' (expected standard_cte or paper_literal)");
}

FittedDistribution fit_inverse_gaussian(const std::vector<Real>& samples,
                                        std::optional<Real> worst_case,
                                        Real worst_case_weight) {
  if (samples.empty()) throw FitError("fit_inverse_gaussian: no samples");
  Real weight_sum = 0, sum = 0, inv_sum = 0;
  auto accumulate = [&](Real x, Real w) {
    if (!(x > 0) || !std::isfinite(x))
      throw FitError("fit_inverse_gaussian: sample " + std::to_string(x) +
                     " is not a positive finite number");
    weight_sum += w;
    sum += w * x;
    inv_sum += w / x;
  };
  for (Real x : samples) accumulate(x, 1.0);
  FittedDistribution out;
  out.source = FitSource::McOnly;
  if (worst_case) {
    if (!(worst_case_weight > 0))
      throw FitError("fit_inverse_gaussian: worst-case weight must be > 0");
    accumulate(*worst_case, worst_case_weight);
    out.source = FitSource::McPlusWorstCase;
  }

  const Real mu = sum / weight_sum;
  const Real inv_lambda = inv_sum / weight_sum - 1.0 / mu;
  out.sample_count = samples.size() + (worst_case ? 1 : 0);
  out.low_sample_warning = out.sample_count < 30;
  out.law.mu = mu;
  // Jensen gives inv_lambda >= 0, zero iff all samples coincide; tiny
  // negatives are floating-point noise from the subtraction.
  if (inv_lambda < 1.0 / kDegenerateLambdaCap) {
    out.law.lambda = kDegenerateLambdaCap;
    out.degenerate = true;
  } else {
    out.law.lambda = 1.0 / inv_lambda;
  }
  if (!out.law.valid()) throw FitError("fit_inverse_gaussian: degenerate parameters");
  return out;
}

Real value_at_risk(const FittedDistribution& dist, Real alpha,
                   Convention convention) {
  if (!(alpha > 0 && alpha < 1))
    throw DomainError("value_at_risk: alpha must be in (0,1)");
  const Real p = convention == Convention::StandardCte ? 1.0 - alpha : alpha;
  return inverse_gaussian_quantile(dist.law, p);
}

Real tail_value_at_risk(const FittedDistribution& dist, Real alpha,
                        Convention convention) {
  if (!(alpha > 0 && alpha < 1))
    throw DomainError("tail_value_at_risk: alpha must be in (0,1)");
  const Real var = value_at_risk(dist, alpha, convention);
  const Real tail_ev = inverse_gaussian_tail_ev(dist.law, var);
  if (convention == Convention::StandardCte) {
    // conditional mean above the (1-alpha)-quantile; tail mass is alpha
    return tail_ev / alpha;
  }
  const Real tail_mass = 1.0 - inverse_gaussian_cdf(dist.law, var);
  return (tail_ev - tail_mass) / (1.0 - alpha);
}

RiskReport price_policy(const FittedDistribution& dist, Real alpha,
                        Real nominal_cost, Convention convention) {
  if (alpha == 0) {
    // no failure risk: coverage never activates, premium is zero
    RiskReport r;
    r.alpha = 0;
    r.convention = convention;
    r.nominal_cost = nominal_cost;
    return r;
  }
  const Real var = value_at_risk(dist, alpha, convention);
  const Real tvar = tail_value_at_risk(dist, alpha, convention);
  return price_from_metrics(alpha, var, tvar, nominal_cost, convention);
}

RiskReport price_from_metrics(Real alpha, Real var_normalized,
                              Real tvar_normalized, Real nominal_cost,
                              Convention convention) {
  RiskReport r;
  r.alpha = alpha;
  r.convention = convention;
  r.nominal_cost = nominal_cost;
  r.var_normalized = var_normalized;
  r.tvar_normalized = tvar_normalized;
  r.premium_normalized = alpha * tvar_normalized;
  r.var_currency = var_normalized * nominal_cost;
  r.tvar_currency = tvar_normalized * nominal_cost;
  r.premium_currency = r.premium_normalized * nominal_cost;
  return r;
}

std::string risk_curve_csv(const FittedDistribution& dist,
                           const std::vector<Real>& alphas, Real nominal_cost,
                           Convention convention) {
  std::ostringstream os;
  os << "alpha,var_normalized,tvar_normalized,premium_normalized,"
        "var_currency,tvar_currency,premium_currency\n";
  os.precision(12);
  for (Real a : alphas) {
    const RiskReport r = price_policy(dist, a, nominal_cost, convention);
    os << a << ',' << r.var_normalized << ',' << r.tvar_normalized << ','
       << r.premium_normalized << ',' << r.var_currency << ','
       << r.tvar_currency << ',' << r.premium_currency << '\n';
  }
  return os.str();
}

std::string risk_report_to_json(const RiskReport& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["alpha"] = r.alpha;
  j["convention"] = to_string(r.convention);
  j["nominal_cost"] = r.nominal_cost;
  j["var"] = {{"normalized", r.var_normalized}, {"currency", r.var_currency}};
  j["tvar"] = {{"normalized", r.tvar_normalized}, {"currency", r.tvar_currency}};
  j["premium"] = {{"normalized", r.premium_normalized},
                  {"currency", r.premium_currency}};
  return j.dump(2);
}

std::string risk_report_summary(const RiskReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "convention : " << to_string(r.convention) << "\n"
     << "alpha      : " << r.alpha << "\n"
     << "nominal    : " << r.nominal_cost << "\n"
     << "VaR        : " << 100.0 * r.var_normalized << "% ("
     << r.var_currency << ")\n"
     << "TVaR       : " << 100.0 * r.tvar_normalized << "% ("
     << r.tvar_currency << ")\n"
     << "premium    : " << 100.0 * r.premium_normalized << "% ("
     << r.premium_currency << ")\n";
  return os.str();
}

std::string fit_to_json(const FittedDistribution& f) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["family"] = "inverse_gaussian";
  j["mu"] = f.mu();
  j["lambda"] = f.lambda();
  j["source"] = f.source == FitSource::McOnly ? "mc_only" : "mc_plus_worst_case";
  j["sample_count"] = f.sample_count;
  j["degenerate"] = f.degenerate;
  j["low_sample_warning"] = f.low_sample_warning;
  return j.dump(2);
}

}  // namespace gridsure::pricing
