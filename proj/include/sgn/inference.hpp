#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sgn/processes.hpp"

namespace sgn {

enum class FitKind { AR1, ARMA11, ARCH1, OU };

std::string fit_kind_name(FitKind kind);
/// ar1, arma11, arch1 or ou; jump diffusion and the deterministic
/// processes have no estimator and raise ValidationError.
FitKind parse_fit_kind(const std::string& name);

struct FitResult {
    FitKind kind = FitKind::AR1;
    std::map<std::string, double> estimates;
    bool converged = false;
    /// Residual sum of squares (AR1, ARMA11, OU) or Gaussian log-likelihood
    /// (ARCH1).
    double objective = 0.0;
};

/// OLS of x_t on (1, x_{t-1}): phi, c, sigma_eps (residual sd with
/// denominator pairs - 2).
FitResult fit_ar1(std::span<const double> x);

/// Conditional sum of squares with eps_0 = 0; |phi|, |theta| < 1 through a
/// tanh reparameterisation; best of 8 simplex restarts.
FitResult fit_arma11(std::span<const double> x);

/// Gaussian quasi-maximum likelihood with h_t^2 = c + phi1 x_{t-1}^2,
/// c = exp(u), phi1 = 0.999 logistic(v).
FitResult fit_arch1(std::span<const double> x);

/// AR(1) fit mapped through the exact OU discretisation.
FitResult fit_ou(std::span<const double> x, double dt);

FitResult fit(FitKind kind, std::span<const double> x, double dt = 1.0);

/// Estimator residual sum of squares of the ARMA(1,1) CSS recursion.
double arma11_css(std::span<const double> x, double phi, double theta, double c);

struct ParamSummary {
    double true_value = 0.0;
    bool has_true_value = false;
    double median = 0.0;
    std::map<double, double> quantiles;  ///< keys 0.05, 0.25, 0.75, 0.95
    std::vector<double> all_estimates;   ///< converged fits, in input order
};

struct EstimateReport {
    FitKind kind = FitKind::AR1;
    std::map<std::string, ParamSummary> params;
    std::vector<bool> converged;  ///< per input fit
    int num_sims = 0;
    int num_converged = 0;
};

/// Linear interpolation between order statistics at (n - 1) p.
double quantile(std::vector<double> values, double p);

/// Per-parameter median and quantiles over converged fits. True values are
/// matched by parameter name; an empty map leaves them unset. Throws
/// NumericalError when no fit converged.
EstimateReport monte_carlo_report(std::span<const FitResult> fits, const std::map<std::string, double>& true_values);
EstimateReport monte_carlo_report(std::span<const FitResult> fits, const ProcessSpec& true_spec);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_distance(std::span<const double> a, std::span<const double> b);

}  // namespace sgn
