#pragma once

#include <cstdint>
#include <vector>

#include "svare/dataset.hpp"
#include "svare/model_params.hpp"
#include "svare/quadrature.hpp"

namespace svare {

enum class SimModel { FE, ARE, SVARE };

// Synthetic repeated cross-sections. Covariates are iid standard normal
// columns named x1..xk. RNG streams are fixed per latent process and per
// group (stream 0: u path, stream 1: h path, stream 2+g: group g covariates
// then noise), so changing k or group sizes never perturbs the latent paths.
struct SimConfig {
  SimModel model = SimModel::SVARE;
  FeParams fe;        // used when model == FE (beta0_t must have length T)
  AreParams are;      // used when model == ARE
  SvareParams svare;  // used when model == SVARE
  int T = 10;
  std::vector<int> group_sizes;  // one entry per period, or a single shared size
  int k = 0;                     // number of standard-normal covariates
  std::uint64_t seed = 0;
};

struct SimResult {
  Dataset data;
  Eigen::VectorXd u;  // true latent level path (time intercepts for FE)
  Eigen::VectorXd h;  // true latent log-variance path (constant for FE/ARE)
};

SimResult simulate(const SimConfig& cfg);

// Brute-force reference for the quadrature likelihood: the full sum over all
// (n_u*n_h)^T node-path combinations, in log-sum-exp form. Guarded to T <= 3
// and n_u, n_h <= 9 — larger requests are a hard error, not a slow run.
double oracle_loglik_tensor(const Dataset& d, const SvareParams& p, const QuadGrid& g);

// Brute-force posterior means on the same node paths: filtered E(.|Y_t),
// smoothed E(.|Y_T), and one-step-ahead predicted E(.|Y_{t-1}) with the
// predicted layout matching StateEstimates (entry s targets time s+2, the
// last entry being the T+1 forecast). Same size guard as the tensor oracle.
struct OracleMeans {
  Eigen::VectorXd filtered_u, filtered_h;
  Eigen::VectorXd smoothed_u, smoothed_h;
  Eigen::VectorXd predicted_u, predicted_h;
};

OracleMeans oracle_state_means(const Dataset& d, const SvareParams& p, const QuadGrid& g);

// Monte Carlo estimate of the exact marginal likelihood by averaging the
// conditional density over prior-simulated latent paths; se_rel is the
// relative standard error of the mean from 100 batch means.
struct McLoglik {
  double loglik = 0.0;
  double se_rel = 0.0;
};

McLoglik oracle_loglik_mc(const Dataset& d, const SvareParams& p, std::int64_t paths,
                          std::uint64_t seed);

}  // namespace svare
