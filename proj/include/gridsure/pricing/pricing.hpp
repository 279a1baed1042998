// SPDX-License-Identifier: Apache-2.0
//
// Actuarial layer: fit the normalized-cost sample set to an inverse Gaussian,
// compute VaR / TVaR at a given confidence, and price the policy.
//
// Two threshold conventions ship side by side. `StandardCte` places VaR at
// the high quantile (tail mass alpha above it) and uses the conditional tail
// expectation; `PaperLiteral` follows the printed formulas verbatim (VaR at
// the alpha-quantile, 1/(1-alpha) scaling, excess-over-nominal integrand).
// The published tables cannot be reconciled with a single convention, so the
// caller picks.
#ifndef GRIDSURE_PRICING_PRICING_HPP
#define GRIDSURE_PRICING_PRICING_HPP

#include <optional>
#include <string>
#include <vector>

#include "gridsure/common.hpp"
#include "gridsure/dist/inverse_gaussian.hpp"

namespace gridsure::pricing {

enum class Convention { StandardCte, PaperLiteral };

const char* to_string(Convention c);
Convention convention_from_string(const std::string& name);

enum class FitSource { McOnly, McPlusWorstCase };

struct FittedDistribution {
  dist::InverseGaussian<Real> law;   // family: inverse Gaussian only
  FitSource source = FitSource::McOnly;
  std::size_t sample_count = 0;
  bool degenerate = false;           // zero sample variance; lambda capped
  bool low_sample_warning = false;   // fewer than 30 samples

  Real mu() const { return law.mu; }
  Real lambda() const { return law.lambda; }
};

inline constexpr Real kDegenerateLambdaCap = 1e12;

/// Maximum-likelihood fit on normalized costs (all > 0):
///   mu_hat     = sample mean,
///   1/lambda_hat = mean(1/x_i - 1/mu_hat).
/// An optional worst-case point is appended with the given weight.
FittedDistribution fit_inverse_gaussian(
    const std::vector<Real>& samples,
    std::optional<Real> worst_case = std::nullopt,
    Real worst_case_weight = 1.0);

/// Coverage threshold. StandardCte: x with G(x) = 1 - alpha. PaperLiteral:
/// min{x : G(x) > alpha}.
Real value_at_risk(const FittedDistribution& dist, Real alpha,
                   Convention convention = Convention::StandardCte);

/// Expected severity beyond the threshold. StandardCte:
/// E[X | X > VaR] = tail partial expectation / alpha. PaperLiteral:
/// (1/(1-alpha)) * integral_{VaR}^inf (x - 1) g(x) dx.
Real tail_value_at_risk(const FittedDistribution& dist, Real alpha,
                        Convention convention = Convention::StandardCte);

struct RiskReport {
  Real alpha = 0;
  Real var_normalized = 0;
  Real var_currency = 0;
  Real tvar_normalized = 0;
  Real tvar_currency = 0;
  Real premium_normalized = 0;
  Real premium_currency = 0;
  Convention convention = Convention::StandardCte;
  Real nominal_cost = 0;
};

/// premium = alpha * TVaR; currency fields scale by the nominal cost.
RiskReport price_policy(const FittedDistribution& dist, Real alpha,
                        Real nominal_cost,
                        Convention convention = Convention::StandardCte);

/// Same report assembled from externally supplied normalized metrics
/// (used to audit published numbers and by the CLI's identity mode).
RiskReport price_from_metrics(Real alpha, Real var_normalized,
                              Real tvar_normalized, Real nominal_cost,
                              Convention convention);

/// (alpha, VaR, TVaR, premium) rows for plotting; alphas must be in (0,1).
std::string risk_curve_csv(const FittedDistribution& dist,
                           const std::vector<Real>& alphas, Real nominal_cost,
                           Convention convention);

std::string risk_report_to_json(const RiskReport& report);
std::string risk_report_summary(const RiskReport& report);
std::string fit_to_json(const FittedDistribution& fit);

}  // namespace gridsure::pricing

#endif  // GRIDSURE_PRICING_PRICING_HPP
