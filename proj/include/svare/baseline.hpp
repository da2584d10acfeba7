#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "svare/dataset.hpp"
#include "svare/model_params.hpp"
#include "svare/optim.hpp"

namespace svare {

inline double aic(double loglik, int n_params) { return -2.0 * loglik + 2.0 * n_params; }
inline double bic(double loglik, int n_params, int n_total) {
  return -2.0 * loglik + n_params * std::log(static_cast<double>(n_total));
}

// Fixed-effects hedonic regression: one intercept per period plus k slopes.
struct FeFit {
  FeParams params;
  Eigen::VectorXd se_beta0_t;  // length T
  Eigen::VectorXd se_beta;     // length k
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int n_params = 0;  // T + k + 1 (intercepts, slopes, sigma2)
  std::vector<Eigen::VectorXd> residuals;  // per group, y - beta0_t - X*beta
};

// OLS on the stacked [time dummies | X] design; sigma2 is the ML variance
// RSS/n and standard errors use it. Throws std::invalid_argument naming the
// offending columns when the design is rank deficient.
FeFit fit_fe(const Dataset& d);

// Output of the exact Gaussian forward filter / backward smoother for the
// AR(1) random-effects model.
struct GaussianFilterOutput {
  double loglik = 0.0;
  Eigen::VectorXd filtered_u;    // E(u_t | Y_t)
  Eigen::VectorXd filtered_var;  // Var(u_t | Y_t)
  Eigen::VectorXd smoothed_u;    // E(u_t | Y_T), the BLUP
  Eigen::VectorXd smoothed_var;  // Var(u_t | Y_T)
  std::vector<Eigen::VectorXd> level1_residuals;  // per group: y - beta0 - u_t - X*beta
  // eta_t = u_t - rho*u_{t-1} from smoothed means; the first entry is
  // u_1*sqrt(1-rho^2) so every element has variance sigma2_eta under the model.
  Eigen::VectorXd level2_residuals;
};

// Exact marginal log-likelihood of the ARE model by a scalar Kalman filter:
// each group collapses to its mean (observation variance sigma2/n_t) plus a
// data-independent remainder, which is exact for the Gaussian family.
// Smoothed means/variances from the Rauch-Tung-Striebel backward pass.
GaussianFilterOutput are_loglik(const Dataset& d, const AreParams& p);

struct AreFit {
  AreParams params;
  std::vector<std::string> param_names;  // beta0, <covariates...>, rho, sigma2_eta, sigma2
  Eigen::VectorXd se;                    // aligned with param_names
  bool se_valid = false;                 // false when the Hessian is not PD
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int n_params = 0;  // k + 4
  Convergence convergence;
  GaussianFilterOutput filter;  // evaluated at the MLE
};

// Direct ML on the filter likelihood under the transforms rho=tanh(z),
// sigma=exp(z); start defaults to a fixed-effects based guess.
AreFit fit_are(const Dataset& d, const std::optional<AreParams>& start = std::nullopt,
               const OptimOptions& opts = {});

}  // namespace svare
