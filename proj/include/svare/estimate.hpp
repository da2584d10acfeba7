#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svare/baseline.hpp"
#include "svare/optim.hpp"
#include "svare/quadrature.hpp"
#include "svare/svcore.hpp"

namespace svare {

// Bijection between the constrained parameters and the unconstrained vector
// the optimizer works in: [beta0, beta..., atanh(rho), log(sigma_eta), alpha,
// atanh(delta), log(sigma_nu)].
Eigen::VectorXd to_unconstrained(const SvareParams& p);
SvareParams from_unconstrained(const Eigen::VectorXd& z, int k);

struct FitOptions {
  int n_u = 0;             // 0 = resolve via default_point_counts at the start
  int n_h = 0;
  double grid_mult = 3.0;  // grid half-width in stationary SDs
  int ma_window = 3;       // moving-average width for the volatility start
  OptimOptions optim;
};

struct SvareFit {
  SvareParams params;
  std::vector<std::string> param_names;  // beta0, beta:<cov>..., rho, sigma_eta,
                                         // alpha, delta, sigma_nu
  Eigen::VectorXd se;                    // aligned with param_names
  bool se_valid = false;                 // false when the Hessian is not PD
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int n_params = 0;  // k + 6
  Convergence convergence;
  StateEstimates states;  // from a forward/backward pass at the MLE
  int n_u = 0, n_h = 0;   // resolved grid sizes
  double grid_mult = 3.0;
};

// Volatility starting values in the spirit of the log-squared-residual
// regression: h*_t = per-period mean of log(resid^2) + 1.27 (the mean of a
// log chi-square(1) is -1.27), smoothed by a centered ma_window-term moving
// average with shrinking windows at the ends, then an OLS of h*_t on h*_{t-1}
// gives delta0 (slope), alpha0 (intercept), sigma_nu0 (residual SD).
// beta0, beta, rho, sigma_eta carry over from the ARE fit. Residuals of
// exactly zero are clamped at 1e-12 before the log.
SvareParams sv_starting_values(const Dataset& d, const AreFit& are_fit, int ma_window = 3);

// Maximum likelihood for the full model: BFGS in the unconstrained space on
// the quadrature likelihood, grid rebuilt around the current parameters at
// every evaluation (sizes fixed up front). Standard errors by the delta
// method from the numerical Hessian; a non-PD Hessian flags se_valid false
// and leaves the fit usable.
SvareFit fit_svare(const Dataset& d, const std::optional<SvareParams>& start = std::nullopt,
                   const FitOptions& opts = {});

struct ProfilePoint {
  double value = 0.0;
  double loglik = 0.0;
};

// Log-likelihood along one named parameter, others held at the MLE; spans
// +- span_se reported standard errors with `points` grid values.
std::vector<ProfilePoint> profile_check(const Dataset& d, const SvareFit& fit,
                                        const std::string& param, double span_se, int points);

}  // namespace svare
