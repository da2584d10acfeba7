#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

namespace svare {

// Fixed-effects hedonic regression: one intercept per time group plus
// common slopes and a single level-1 variance.
struct FeParams {
  Eigen::VectorXd beta0_t;  // T time intercepts
  Eigen::VectorXd beta;     // k slopes
  double sigma2 = 1.0;

  void validate() const {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("FeParams: sigma2 must be > 0");
  }
};

// Multilevel model with AR(1) random time effects and homoscedastic
// level-1 errors.
struct AreParams {
  double beta0 = 0.0;
  Eigen::VectorXd beta;
  double rho = 0.0;
  double sigma2_eta = 0.0;  // innovation variance of the random effect
  double sigma2 = 1.0;      // level-1 variance

  void validate() const {
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("AreParams: |rho| must be < 1");
    if (sigma2_eta < 0.0) throw std::invalid_argument("AreParams: sigma2_eta must be >= 0");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("AreParams: sigma2 must be > 0");
  }
  double u_stationary_var() const { return sigma2_eta / (1.0 - rho * rho); }
};

// Multilevel model with AR(1) random effects and AR(1) log-volatility;
// exp(h_t) is the level-1 variance.
struct SvareParams {
  double beta0 = 0.0;
  Eigen::VectorXd beta;
  double rho = 0.0;
  double sigma_eta = 0.1;  // innovation SD of the random-effect process
  double alpha = 0.0;
  double delta = 0.0;
  double sigma_nu = 0.1;   // innovation SD of the volatility process

  void validate() const {
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("SvareParams: |rho| must be < 1");
    if (!(std::abs(delta) < 1.0)) throw std::invalid_argument("SvareParams: |delta| must be < 1");
    if (!(sigma_eta > 0.0)) throw std::invalid_argument("SvareParams: sigma_eta must be > 0");
    if (!(sigma_nu > 0.0)) throw std::invalid_argument("SvareParams: sigma_nu must be > 0");
  }

  int k() const { return static_cast<int>(beta.size()); }

  // Stationary moments of the two latent processes.
  double u_stationary_sd() const { return sigma_eta / std::sqrt(1.0 - rho * rho); }
  double u_stationary_var() const { return sigma_eta * sigma_eta / (1.0 - rho * rho); }
  double h_stationary_mean() const { return alpha / (1.0 - delta); }
  double h_stationary_sd() const { return sigma_nu / std::sqrt(1.0 - delta * delta); }
  double h_stationary_var() const { return sigma_nu * sigma_nu / (1.0 - delta * delta); }
};

}  // namespace svare
