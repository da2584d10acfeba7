#include <cmath>
#include <numbers>

#include "doctest.h"
#include "svare/svcore.hpp"
#include "svare/simulate.hpp"

using namespace svare;

namespace {

// T=2 dataset with group sizes 2/1 and one covariate; used with a 3x3 grid so
// an independently computed brute-force value pins the whole pipeline.
Dataset tiny_dataset() {
  Dataset d;
  TimeGroup a, b;
  a.label = "t1";
  a.y = Eigen::VectorXd(2);
  a.y << 0.6, -0.1;
  a.X = Eigen::MatrixXd(2, 1);
  a.X << 0.5, -0.3;
  b.label = "t2";
  b.y = Eigen::VectorXd(1);
  b.y << 0.9;
  b.X = Eigen::MatrixXd(1, 1);
  b.X << 0.2;
  d.groups = {a, b};
  d.covariate_names = {"x"};
  return d;
}

SvareParams tiny_params() {
  SvareParams p;
  p.beta0 = 0.2;
  p.beta = Eigen::VectorXd(1);
  p.beta << 0.4;
  p.rho = 0.7;
  p.sigma_eta = 0.3;
  p.alpha = -0.5;
  p.delta = 0.8;
  p.sigma_nu = 0.4;
  return p;
}

Dataset random_dataset(std::uint64_t seed, int T, int max_nt, int k) {
  SimConfig cfg;
  cfg.model = SimModel::SVARE;
  cfg.svare = tiny_params();
  cfg.svare.beta = Eigen::VectorXd::Constant(k, 0.3);
  cfg.T = T;
  cfg.group_sizes.clear();
  for (int t = 0; t < T; ++t) cfg.group_sizes.push_back(1 + static_cast<int>((seed + t) % max_nt));
  cfg.k = k;
  cfg.seed = seed;
  return simulate(cfg).data;
}

}  // namespace

TEST_CASE("sufficient statistics match direct sums") {
  const Dataset d = tiny_dataset();
  const SvareParams p = tiny_params();
  const auto stats = residual_stats(d, p);
  REQUIRE(stats.size() == 2);

  const double r11 = 0.6 - 0.2 - 0.4 * 0.5;
  const double r12 = -0.1 - 0.2 - 0.4 * -0.3;
  const double r21 = 0.9 - 0.2 - 0.4 * 0.2;
  CHECK(stats[0].n == 2.0);
  CHECK(stats[0].s1 == doctest::Approx(r11 + r12).epsilon(1e-14));
  CHECK(stats[0].s2 == doctest::Approx(r11 * r11 + r12 * r12).epsilon(1e-14));
  CHECK(stats[1].n == 1.0);
  CHECK(stats[1].s1 == doctest::Approx(r21).epsilon(1e-14));
  CHECK(stats[1].s2 == doctest::Approx(r21 * r21).epsilon(1e-14));
}

TEST_CASE("observation log-density equals the direct normal product") {
  const Dataset d = tiny_dataset();
  const SvareParams p = tiny_params();
  const QuadGrid g = build_grid(p, 3, 3, 3.0);
  const Eigen::MatrixXd M = obs_logdensity_grid(d, 0, p, g);
  REQUIRE(M.rows() == 3);
  REQUIRE(M.cols() == 3);

  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double u = g.u.points[i];
      const double var = std::exp(g.h.points[j]);
      double expect = 0.0;
      for (Eigen::Index r = 0; r < d.groups[0].y.size(); ++r) {
        const double mean = p.beta0 + u + d.groups[0].X.row(r).dot(p.beta);
        const double z = d.groups[0].y[r] - mean;
        expect += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * z * z / var;
      }
      CHECK(M(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward likelihood matches the frozen brute-force value") {
  const Dataset d = tiny_dataset();
  const SvareParams p = tiny_params();
  const QuadGrid g = build_grid(p, 3, 3, 3.0);
  // Value from an independent dense-summation implementation (numpy).
  const double expect = -0.66108626087502254;
  CHECK(forward_loglik(d, p, g) == doctest::Approx(expect).epsilon(1e-12));

  const RecursionState st = forward(d, p, g);
  CHECK(st.loglik() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(st.l.size() == 2);
  CHECK(st.c.size() == 2);
  // Scaled vectors each sum to one by construction.
  CHECK(st.l[0].sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.l[1].sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward agrees with the tensor oracle on random instances") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const int T = 2 + static_cast<int>(seed % 2);
    const Dataset d = random_dataset(seed, T, 3, seed % 2 ? 1 : 0);
    SvareParams p = tiny_params();
    p.beta = Eigen::VectorXd::Constant(d.k(), 0.3);
    const QuadGrid g = build_grid(p, 5, 7, 3.0);
    const double fwd = forward_loglik(d, p, g);
    const double oracle = oracle_loglik_tensor(d, p, g);
    CHECK(fwd == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("backward pass closes the likelihood identity at every period") {
  const Dataset d = random_dataset(4, 3, 3, 1);
  SvareParams p = tiny_params();
  p.beta = Eigen::VectorXd::Constant(1, 0.3);
  RecursionState st = forward(d, p, build_grid(p, 7, 7, 3.0));
  backward(d, p, st);
  REQUIRE(st.has_backward);
  const double ll = st.loglik();

  // For every t: sum_ij l_t(i,j) b_t(i,j) = likelihood (unscaled), i.e.
  // log(sum l_hat b_hat) + sum_{s<=t} c_s + cb_t = loglik.
  for (int t = 0; t < 3; ++t) {
    const double dot = (st.l[t].array() * st.b[t].array()).sum();
    const double recovered = std::log(dot) + st.c.head(t + 1).sum() + st.cb[t];
    CHECK(recovered == doctest::Approx(ll).epsilon(1e-10));
  }
}

TEST_CASE("state means match the frozen brute-force values") {
  const Dataset d = tiny_dataset();
  const SvareParams p = tiny_params();
  RecursionState st = forward(d, p, build_grid(p, 3, 3, 3.0));
  const StateEstimates est = estimate_states(d, p, st);

  // All values from the independent dense-summation implementation.
  CHECK(est.filtered_u[0] == doctest::Approx(4.3983229322825224e-06).epsilon(1e-10));
  CHECK(est.filtered_h[0] == doctest::Approx(-2.5380608759644971).epsilon(1e-12));
  CHECK(est.filtered_u[1] == doctest::Approx(0.014368213905472712).epsilon(1e-10));
  CHECK(est.filtered_h[1] == doctest::Approx(-2.4728270873173921).epsilon(1e-12));

  CHECK(est.smoothed_u[0] == doctest::Approx(3.3390199664080995e-05).epsilon(1e-10));
  CHECK(est.smoothed_h[0] == doctest::Approx(-2.4746657324484604).epsilon(1e-12));
  CHECK(est.smoothed_u[1] == doctest::Approx(0.014368213905472712).epsilon(1e-10));
  CHECK(est.smoothed_h[1] == doctest::Approx(-2.4728270873173921).epsilon(1e-12));

  // predicted entry s targets time s+2: here E(.|Y_1) for t=2 and the
  // out-of-sample T+1 = 3 forecast.
  CHECK(est.predicted_u[0] == doctest::Approx(8.5565425461253546e-07).epsilon(1e-8));
  CHECK(est.predicted_h[0] == doctest::Approx(-2.5181113347697384).epsilon(1e-12));
  CHECK(est.predicted_u[1] == doctest::Approx(0.0056108172318111819).epsilon(1e-10));
  CHECK(est.predicted_h[1] == doctest::Approx(-2.4872390782866067).epsilon(1e-12));

  // At t=T filtering and smoothing coincide exactly.
  CHECK(est.filtered_u[1] == est.smoothed_u[1]);
  CHECK(est.filtered_h[1] == est.smoothed_h[1]);
}

TEST_CASE("filter, smooth and predict helpers agree with the bundle") {
  const Dataset d = random_dataset(9, 3, 3, 1);
  SvareParams p = tiny_params();
  p.beta = Eigen::VectorXd::Constant(1, 0.3);
  RecursionState st = forward(d, p, build_grid(p, 7, 9, 3.0));
  backward(d, p, st);

  const auto [fu, fh] = filter_states(st);
  const auto [su, sh] = smooth_states(st);
  RecursionState st2 = forward(d, p, build_grid(p, 7, 9, 3.0));
  const StateEstimates est = estimate_states(d, p, st2);
  for (int t = 0; t < 3; ++t) {
    CHECK(fu[t] == doctest::Approx(est.filtered_u[t]).epsilon(1e-13));
    CHECK(fh[t] == doctest::Approx(est.filtered_h[t]).epsilon(1e-13));
    CHECK(su[t] == doctest::Approx(est.smoothed_u[t]).epsilon(1e-13));
    CHECK(sh[t] == doctest::Approx(est.smoothed_h[t]).epsilon(1e-13));
  }
  for (int s = 0; s < 3; ++s) {
    const auto [pu, ph] = predict_states(st, p, s + 2);
    CHECK(pu == doctest::Approx(est.predicted_u[s]).epsilon(1e-13));
    CHECK(ph == doctest::Approx(est.predicted_h[s]).epsilon(1e-13));
  }
  CHECK_THROWS_AS(predict_states(st, p, 1), std::invalid_argument);
  CHECK_THROWS_AS(predict_states(st, p, 5), std::invalid_argument);
}

TEST_CASE("predictions obey the AR tower property on a fine grid") {
  const Dataset d = random_dataset(5, 3, 4, 0);
  SvareParams p = tiny_params();
  p.beta = Eigen::VectorXd(0);
  RecursionState st = forward(d, p, build_grid(p, 41, 41, 4.0));
  const StateEstimates est = estimate_states(d, p, st);

  // E(u_{t+1}|Y_t) = rho E(u_t|Y_t); quadrature error only.
  for (int t = 0; t < 3; ++t) {
    CHECK(est.predicted_u[t] ==
          doctest::Approx(p.rho * est.filtered_u[t]).epsilon(5e-4).scale(1.0));
    CHECK(est.predicted_h[t] ==
          doctest::Approx(p.alpha + p.delta * est.filtered_h[t]).epsilon(5e-4).scale(1.0));
  }
}

TEST_CASE("residual bundles standardize by the smoothed volatility") {
  const Dataset d = tiny_dataset();
  const SvareParams p = tiny_params();
  RecursionState st = forward(d, p, build_grid(p, 5, 5, 3.0));
  const StateEstimates est = estimate_states(d, p, st);

  REQUIRE(est.level1_std_residuals.size() == 2);
  for (int t = 0; t < 2; ++t)
    for (Eigen::Index i = 0; i < d.groups[t].y.size(); ++i) {
      const double raw = d.groups[t].y[i] - p.beta0 -
                         d.groups[t].X.row(i).dot(p.beta) - est.smoothed_u[t];
      const double expect = raw * std::exp(-0.5 * est.smoothed_h[t]);
      CHECK(est.level1_std_residuals[t][i] == doctest::Approx(expect).epsilon(1e-10));
    }

  CHECK(est.level2_eta[0] ==
        doctest::Approx(est.smoothed_u[0] * std::sqrt(1.0 - p.rho * p.rho)).epsilon(1e-12));
  CHECK(est.level2_eta[1] ==
        doctest::Approx(est.smoothed_u[1] - p.rho * est.smoothed_u[0]).epsilon(1e-12));
  const double mu_h = p.h_stationary_mean();
  CHECK(est.level2_nu[0] ==
        doctest::Approx((est.smoothed_h[0] - mu_h) * std::sqrt(1.0 - p.delta * p.delta) /
                        p.sigma_nu)
            .epsilon(1e-12));
  CHECK(est.level2_nu[1] ==
        doctest::Approx((est.smoothed_h[1] - p.alpha - p.delta * est.smoothed_h[0]) /
                        p.sigma_nu)
            .epsilon(1e-12));
}

TEST_CASE("price forecasts add the predicted level to the linear term") {
  const Dataset d = tiny_dataset();
  const SvareParams p = tiny_params();
  RecursionState st = forward(d, p, build_grid(p, 5, 5, 3.0));
  const StateEstimates est = estimate_states(d, p, st);

  Eigen::MatrixXd Xn(2, 1);
  Xn << 1.0, -2.0;
  const Eigen::VectorXd yhat = predict_prices(Xn, est, p);
  const double u_next = est.predicted_u[1];  // last entry: T+1 forecast
  CHECK(yhat[0] == doctest::Approx(p.beta0 + u_next + 0.4 * 1.0).epsilon(1e-12));
  CHECK(yhat[1] == doctest::Approx(p.beta0 + u_next + 0.4 * -2.0).epsilon(1e-12));

  Eigen::MatrixXd bad(1, 3);
  CHECK_THROWS_AS(predict_prices(bad, est, p), std::invalid_argument);
}

TEST_CASE("a starved grid raises a diagnostic error") {
  // A level jump the transition kernel cannot bridge: the posterior pins to
  // one grid edge, the next observation demands the other, and with a
  // near-unit-root u process every connecting transition density underflows.
  Dataset d;
  d.covariate_names = {};
  d.groups.resize(2);
  d.groups[0] = {"t1", Eigen::VectorXd::Constant(1, -200.0), Eigen::MatrixXd(1, 0)};
  d.groups[1] = {"t2", Eigen::VectorXd::Constant(1, 200.0), Eigen::MatrixXd(1, 0)};

  SvareParams p;
  p.beta0 = 0.0;
  p.beta = Eigen::VectorXd(0);
  p.rho = 0.9975;
  p.sigma_eta = 0.001;
  p.delta = 0.5;
  p.alpha = -2.3;  // stationary mean log-variance -4.6
  p.sigma_nu = 0.05;
  const QuadGrid g = build_grid(p, 3, 3, 3.0);
  CHECK_THROWS_WITH_AS(forward_loglik(d, p, g), doctest::Contains("grid starvation"),
                       std::runtime_error);
}
