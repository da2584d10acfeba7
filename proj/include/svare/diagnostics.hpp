#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace svare {

// Bias-adjusted sample skewness b1 and excess kurtosis b2 (the Joanes-Gill
// adjusted versions of the moment ratios g1, g2).
struct Moments {
  double b1 = 0.0;
  double b2 = 0.0;
};

Moments moments(const Eigen::VectorXd& x);

// Per-period residual standard deviations (denominator n_t - 1).
Eigen::VectorXd per_period_sd(const std::vector<Eigen::VectorXd>& grouped);

// Autocorrelations with the biased (1/T) normalization and partial
// autocorrelations via Durbin-Levinson. acf[0] = 1 by construction; both
// series carry the +-1.96/sqrt(T) white-noise band.
struct SerialCorr {
  Eigen::VectorXd acf;   // lags 0..L
  Eigen::VectorXd pacf;  // lags 1..L
  double band = 0.0;
};

SerialCorr acf_pacf(const Eigen::VectorXd& x, int L);

// Hellinger-type entropy dependence measure at lags 1..L:
//   S_k = 1/2 * double integral of (sqrt(f_(X_t,X_t+k)) - sqrt(f_X_t f_X_t+k))^2,
// with Gaussian-kernel densities (Silverman bandwidth per axis) integrated by
// the trapezoid rule on a 101x101 grid spanning the data range +-3 bandwidths.
// Null bands are order statistics of S over B permutations of the series at
// levels 90% and 95% (index ceil(q*(B+1)), exact for the permutation test).
struct EntropySeries {
  Eigen::VectorXd s;       // lags 1..L
  Eigen::VectorXd band90;  // per-lag null quantiles
  Eigen::VectorXd band95;
};

EntropySeries entropy_sk(const Eigen::VectorXd& x, int L, int B, std::uint64_t seed);

// Rank-based Levene-type homogeneity test: Kruskal-Wallis (midranks, tie
// corrected) applied to the absolute deviations from per-period medians;
// p-value from chi-square with T-1 degrees of freedom. All deviations tied
// degenerates to statistic 0, p-value 1.
struct LeveneResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

LeveneResult rank_levene(const std::vector<Eigen::VectorXd>& grouped);

struct PredMetrics {
  double mae = 0.0;
  double rmse = 0.0;
};

PredMetrics prediction_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

// Fixed-base price index I_t = exp(b0_t - b0_base) * 100 with b0_t = beta0 +
// smoothed u_t; base entry exactly 100. base10 switches the exponential to
// 10^x for a response modelled in log10 units.
struct PriceIndex {
  std::string base;
  std::vector<std::string> labels;
  Eigen::VectorXd index;
  Eigen::VectorXd beta0_t;
};

PriceIndex price_index(const std::vector<std::string>& labels, double beta0,
                       const Eigen::VectorXd& smoothed_u, const std::string& base,
                       bool base10 = false);

}  // namespace svare
