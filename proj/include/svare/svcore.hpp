#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "svare/dataset.hpp"
#include "svare/model_params.hpp"
#include "svare/quadrature.hpp"

namespace svare {

// Per-period sufficient statistics of the partial residuals
// r_it = y_it - beta0 - x_it'beta; the observation density over the whole
// grid needs only these, exact for the Gaussian family.
struct GroupStats {
  double n = 0.0;
  double s1 = 0.0;  // sum of r
  double s2 = 0.0;  // sum of r^2
};

std::vector<GroupStats> residual_stats(const Dataset& d, const SvareParams& p);

// Log of the period-t observation density at every grid node:
// entry (i,j) = sum over items of log Normal(y_it; beta0 + u_i + x'beta, exp(h_j))
//             = -(n_t/2)(log 2pi + h_j) - e^{-h_j}/2 (s2 - 2 u_i s1 + n u_i^2).
// Column-major n_u x n_h, so the flattened layout has the u index fastest.
Eigen::MatrixXd obs_logdensity_grid(const Dataset& d, int t, const SvareParams& p,
                                    const QuadGrid& g);

// Forward/backward quadrature recursion in scaled form. Every stored matrix
// sums to one; true magnitudes live in the accumulated log scale factors:
//   unscaled l_t = l[t] * exp(c[0] + ... + c[t])
//   unscaled b_t = b[t] * exp(cb[t])        (accumulated from T downward)
// so log 1'l_T, the approximated log-likelihood, equals c.sum().
struct RecursionState {
  QuadGrid grid;
  std::vector<Eigen::MatrixXd> l;  // n_u x n_h per period
  Eigen::VectorXd c;
  std::vector<Eigen::MatrixXd> b;  // filled by backward()
  Eigen::VectorXd cb;
  bool has_backward = false;

  double loglik() const { return c.sum(); }
};

// Likelihood-only forward pass (no per-period storage); cheaper inner loop
// for the optimizer. Throws std::runtime_error("...grid starvation...") when
// the total probability underflows to exactly zero at some period.
double forward_loglik(const Dataset& d, const SvareParams& p, const QuadGrid& g);

// Forward pass retaining the per-period joint vectors for state estimation.
RecursionState forward(const Dataset& d, const SvareParams& p, const QuadGrid& g);

// Backward conditional probabilities b_t(i,j) = f(y_{t+1..T} | u_t=u_i, h_t=h_j)
// on the grid, b_T = 1; same scaling scheme as forward.
void backward(const Dataset& d, const SvareParams& p, RecursionState& st);

// Posterior means of the latent states on the quadrature grid.
// predicted_* entry s holds E(state_{s+2} | Y_{s+1}) for s = 0..T-1: targets
// run from t=2 to t=T+1, so the last entry is the genuine out-of-sample
// forecast.
struct StateEstimates {
  Eigen::VectorXd filtered_u, filtered_h;    // E(. | Y_t), length T
  Eigen::VectorXd smoothed_u, smoothed_h;    // E(. | Y_T), length T
  Eigen::VectorXd predicted_u, predicted_h;  // see layout note above
  std::vector<Eigen::VectorXd> level1_std_residuals;  // per group, scaled by exp(h/2)
  Eigen::VectorXd level2_eta;  // u_t - rho*u_{t-1}; first entry u_1*sqrt(1-rho^2)
  Eigen::VectorXd level2_nu;   // (h_t - alpha - delta*h_{t-1})/sigma_nu; first entry
                               // standardized against the stationary law
};

// Filtered means from the forward vectors alone (normalization cancels).
std::pair<Eigen::VectorXd, Eigen::VectorXd> filter_states(const RecursionState& st);

// Smoothed means from both passes; at t=T smoothed equals filtered exactly.
std::pair<Eigen::VectorXd, Eigen::VectorXd> smooth_states(const RecursionState& st);

// One-step-ahead means E(u_t|Y_{t-1}), E(h_t|Y_{t-1}) for 2 <= target_t <= T+1:
// one transition step applied to l_{t-1} with no data update, then grid means.
std::pair<double, double> predict_states(const RecursionState& st, const SvareParams& p,
                                         int target_t);

// Full bundle: runs backward() if needed and assembles every field, including
// standardized residuals from the smoothed states.
StateEstimates estimate_states(const Dataset& d, const SvareParams& p, RecursionState& st);

// Point forecast on the log10 scale for covariate rows at time T+1:
// yhat = beta0 + E(u_{T+1}|Y_T) + x'beta.
Eigen::VectorXd predict_prices(const Eigen::MatrixXd& X_new, const StateEstimates& est,
                               const SvareParams& p);

}  // namespace svare
