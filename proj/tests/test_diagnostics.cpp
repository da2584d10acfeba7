#include <cmath>

#include "doctest.h"
#include "svare/diagnostics.hpp"
#include "svare/rng.hpp"

using namespace svare;

TEST_CASE("skewness and kurtosis match the adjusted-moment reference") {
  Eigen::VectorXd x(10);
  x << 0.3, -1.2, 0.7, 2.1, -0.4, 0.0, 1.5, -2.2, 0.9, 0.1;
  const Moments m = moments(x);
  // Frozen values from an independent implementation of the
  // sample-size-adjusted skewness/excess-kurtosis indexes.
  CHECK(m.b1 == doctest::Approx(-0.32463071649919845).epsilon(1e-12));
  CHECK(m.b2 == doctest::Approx(-0.87204679864610712).epsilon(1e-12));

  CHECK_THROWS_AS(moments(Eigen::VectorXd::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(moments(Eigen::VectorXd::Constant(10, 2.0)), std::invalid_argument);

  // A symmetric two-point sample has b1 = 0 and minimal kurtosis.
  Eigen::VectorXd sym(6);
  sym << -1, 1, -1, 1, -1, 1;
  const Moments ms = moments(sym);
  CHECK(ms.b1 == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
}

TEST_CASE("autocorrelations match the reference values") {
  Eigen::VectorXd y(12);
  y << 0.8, 1.9, -0.3, 0.2, 1.1, -0.9, -1.4, 0.5, 2.2, -0.6, 0.4, 1.0;
  const SerialCorr sc = acf_pacf(y, 4);

  REQUIRE(sc.acf.size() == 5);
  CHECK(sc.acf[0] == doctest::Approx(1.0).epsilon(1e-15));
  // Frozen: biased normalization r_k = sum c_t c_{t-k} / sum c_t^2.
  CHECK(sc.acf[1] == doctest::Approx(-0.062653944183854879).epsilon(1e-12));
  CHECK(sc.acf[2] == doctest::Approx(-0.47189916254363984).epsilon(1e-12));
  CHECK(sc.acf[3] == doctest::Approx(0.22018569684508127).epsilon(1e-12));
  CHECK(sc.acf[4] == doctest::Approx(0.17031849043671957).epsilon(1e-12));

  // Frozen: partial autocorrelations via Yule-Walker (Toeplitz solves).
  REQUIRE(sc.pacf.size() == 4);
  CHECK(sc.pacf[0] == doctest::Approx(-0.062653944183854879).epsilon(1e-12));
  CHECK(sc.pacf[1] == doctest::Approx(-0.47769989820383169).epsilon(1e-12));
  CHECK(sc.pacf[2] == doctest::Approx(0.19064888486171275).epsilon(1e-12));
  CHECK(sc.pacf[3] == doctest::Approx(-0.046570236829751817).epsilon(1e-12));

  CHECK(sc.band == doctest::Approx(0.56580326380583323).epsilon(1e-12));

  CHECK_THROWS_AS(acf_pacf(y, 0), std::invalid_argument);
  CHECK_THROWS_AS(acf_pacf(y.head(3), 4), std::invalid_argument);
  CHECK_THROWS_AS(acf_pacf(Eigen::VectorXd::Constant(12, 1.0), 2), std::invalid_argument);
}

TEST_CASE("per-period dispersion uses the unbiased standard deviation") {
  std::vector<Eigen::VectorXd> groups(2);
  groups[0] = Eigen::VectorXd(3);
  groups[0] << 1.0, 2.0, 3.0;
  groups[1] = Eigen::VectorXd(2);
  groups[1] << -1.0, 1.0;
  const Eigen::VectorXd sd = per_period_sd(groups);
  CHECK(sd[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sd[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  groups[1] = Eigen::VectorXd(1);
  CHECK_THROWS_AS(per_period_sd(groups), std::invalid_argument);
}

TEST_CASE("entropy statistics match the frozen kernel-density values") {
  Eigen::VectorXd x(40);
  x << 0.496714, -0.138264, 0.647689, 1.52303, -0.234153, -0.234137, 1.579213, 0.767435,
      -0.469474, 0.54256, -0.463418, -0.46573, 0.241962, -1.91328, -1.724918, -0.562288,
      -1.012831, 0.314247, -0.908024, -1.412304, 1.465649, -0.225776, 0.067528, -1.424748,
      -0.544383, 0.110923, -1.150994, 0.375698, -0.600639, -0.291694, -0.601707, 1.852278,
      -0.013497, -1.057711, 0.822545, -1.220844, 0.208864, -1.95967, -1.328186, 0.196861;

  const EntropySeries es = entropy_sk(x, 2, 99, 7);
  REQUIRE(es.s.size() == 2);
  // Frozen values from an independent numpy implementation of the
  // Silverman-bandwidth kernel estimator on a 101-point trapezoid grid.
  CHECK(es.s[0] == doctest::Approx(0.021075406939491646).epsilon(1e-10));
  CHECK(es.s[1] == doctest::Approx(0.023312330663163114).epsilon(1e-10));

  // Permutation bands: nonnegative, ordered, deterministic under the seed.
  for (int k = 0; k < 2; ++k) {
    CHECK(es.band90[k] > 0.0);
    CHECK(es.band95[k] >= es.band90[k]);
  }
  const EntropySeries es2 = entropy_sk(x, 2, 99, 7);
  CHECK(es.band95[0] == es2.band95[0]);
  const EntropySeries es3 = entropy_sk(x, 2, 99, 8);
  CHECK(es.band95[0] != es3.band95[0]);

  CHECK_THROWS_AS(entropy_sk(x.head(11), 1, 99, 1), std::invalid_argument);
  CHECK_THROWS_AS(entropy_sk(x, 2, 50, 1), std::invalid_argument);
}

TEST_CASE("entropy grows with serial dependence") {
  // A strongly dependent series scores well above an independent one.
  Philox rng(123, 0);
  Eigen::VectorXd indep(80), dep(80);
  double prev = 0.0;
  for (int i = 0; i < 80; ++i) {
    indep[i] = rng.next_normal();
    prev = 0.95 * prev + 0.05 * rng.next_normal();
    dep[i] = prev;
  }
  const EntropySeries ei = entropy_sk(indep, 1, 99, 3);
  const EntropySeries ed = entropy_sk(dep, 1, 99, 3);
  CHECK(ed.s[0] > ei.s[0]);
  CHECK(ed.s[0] > ed.band95[0]);  // dependence detected
}

TEST_CASE("rank dispersion test matches the frozen reference") {
  std::vector<Eigen::VectorXd> groups(3);
  groups[0] = Eigen::VectorXd(5);
  groups[0] << 0.5, -0.3, 1.2, 0.8, -1.1;
  groups[1] = Eigen::VectorXd(4);
  groups[1] << 2.0, -2.5, 1.8, -1.9;
  groups[2] = Eigen::VectorXd(6);
  groups[2] << 0.1, -0.2, 0.05, 0.3, -0.15, 0.12;
  const LeveneResult r = rank_levene(groups);
  // Frozen from an independent Kruskal-Wallis implementation on the
  // absolute deviations from the per-group medians.
  CHECK(r.statistic == doctest::Approx(9.7524150268336385).epsilon(1e-10));
  CHECK(r.p_value == doctest::Approx(0.0076258803042343355).epsilon(1e-10));

  // All deviations tied: no evidence, statistic 0 and p-value 1.
  std::vector<Eigen::VectorXd> tied(2);
  tied[0] = Eigen::VectorXd(2);
  tied[0] << 1.0, 1.0;
  tied[1] = Eigen::VectorXd(2);
  tied[1] << 5.0, 5.0;
  const LeveneResult rt = rank_levene(tied);
  CHECK(rt.statistic == 0.0);
  CHECK(rt.p_value == 1.0);

  std::vector<Eigen::VectorXd> one(1);
  one[0] = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(rank_levene(one), std::invalid_argument);
  std::vector<Eigen::VectorXd> small(2);
  small[0] = Eigen::VectorXd::Zero(1);
  small[1] = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(rank_levene(small), std::invalid_argument);
}

TEST_CASE("forecast metrics are the plain MAE and RMSE") {
  Eigen::VectorXd yt(4), yp(4);
  yt << 1.0, 2.0, 3.0, 4.0;
  yp << 1.5, 1.0, 3.0, 6.0;
  const PredMetrics m = prediction_metrics(yt, yp);
  CHECK(m.mae == doctest::Approx((0.5 + 1.0 + 0.0 + 2.0) / 4.0).epsilon(1e-14));
  CHECK(m.rmse == doctest::Approx(std::sqrt((0.25 + 1.0 + 0.0 + 4.0) / 4.0)).epsilon(1e-14));

  CHECK_THROWS_AS(prediction_metrics(yt, yp.head(3)), std::invalid_argument);
  CHECK_THROWS_AS(prediction_metrics(Eigen::VectorXd(0), Eigen::VectorXd(0)),
                  std::invalid_argument);
}

TEST_CASE("the price index is exactly 100 at the base period") {
  const std::vector<std::string> labels = {"s1", "s2", "s3"};
  Eigen::VectorXd u(3);
  u << 0.0, 0.2, -0.1;

  const PriceIndex idx = price_index(labels, 3.0, u, "s1", false);
  CHECK(idx.base == "s1");
  CHECK(idx.index[0] == 100.0);
  CHECK(idx.index[1] == doctest::Approx(100.0 * std::exp(0.2)).epsilon(1e-12));
  CHECK(idx.index[2] == doctest::Approx(100.0 * std::exp(-0.1)).epsilon(1e-12));
  CHECK(idx.beta0_t[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(idx.beta0_t[1] == doctest::Approx(3.2).epsilon(1e-14));

  // Base-10 responses: the log difference converts through ln 10.
  const PriceIndex idx10 = price_index(labels, 3.0, u, "s2", true);
  CHECK(idx10.index[1] == 100.0);
  CHECK(idx10.index[0] == doctest::Approx(100.0 * std::pow(10.0, -0.2)).epsilon(1e-12));
  CHECK(idx10.index[2] == doctest::Approx(100.0 * std::pow(10.0, -0.3)).epsilon(1e-12));

  CHECK_THROWS_AS(price_index(labels, 3.0, u, "nope", false), std::invalid_argument);
  CHECK_THROWS_AS(price_index(labels, 3.0, u.head(2), "s1", false), std::invalid_argument);
}
