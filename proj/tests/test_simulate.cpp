#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "svare/simulate.hpp"
#include "svare/svcore.hpp"

using namespace svare;

namespace {

SimConfig svare_config(std::uint64_t seed) {
  SimConfig cfg;
  cfg.model = SimModel::SVARE;
  cfg.svare.beta0 = 0.2;
  cfg.svare.beta = Eigen::VectorXd(1);
  cfg.svare.beta << 0.4;
  cfg.svare.rho = 0.7;
  cfg.svare.sigma_eta = 0.3;
  cfg.svare.alpha = -0.5;
  cfg.svare.delta = 0.8;
  cfg.svare.sigma_nu = 0.4;
  cfg.T = 6;
  cfg.group_sizes = {4};
  cfg.k = 1;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("simulation is deterministic under a fixed seed") {
  const SimResult a = simulate(svare_config(7));
  const SimResult b = simulate(svare_config(7));
  for (int t = 0; t < a.data.T(); ++t) {
    CHECK(a.u[t] == b.u[t]);
    CHECK(a.h[t] == b.h[t]);
    for (Eigen::Index i = 0; i < a.data.groups[t].y.size(); ++i) {
      CHECK(a.data.groups[t].y[i] == b.data.groups[t].y[i]);
      CHECK(a.data.groups[t].X(i, 0) == b.data.groups[t].X(i, 0));
    }
  }

  const SimResult c = simulate(svare_config(8));
  CHECK(a.u != c.u);
}

TEST_CASE("latent paths are invariant to the covariate count") {
  SimConfig base = svare_config(13);
  const SimResult with_k1 = simulate(base);

  SimConfig no_cov = base;
  no_cov.k = 0;
  no_cov.svare.beta = Eigen::VectorXd(0);
  const SimResult with_k0 = simulate(no_cov);

  SimConfig more_cov = base;
  more_cov.k = 3;
  more_cov.svare.beta = Eigen::VectorXd::Constant(3, 0.1);
  const SimResult with_k3 = simulate(more_cov);

  for (int t = 0; t < base.T; ++t) {
    CHECK(with_k1.u[t] == with_k0.u[t]);
    CHECK(with_k1.h[t] == with_k0.h[t]);
    CHECK(with_k1.u[t] == with_k3.u[t]);
    CHECK(with_k1.h[t] == with_k3.h[t]);
  }

  // Group sizes also leave the latent processes untouched.
  SimConfig bigger = base;
  bigger.group_sizes = {11};
  const SimResult big = simulate(bigger);
  for (int t = 0; t < base.T; ++t) {
    CHECK(big.u[t] == with_k1.u[t]);
    CHECK(big.h[t] == with_k1.h[t]);
  }
}

TEST_CASE("period labels use fixed-width natural numbering") {
  SimConfig cfg = svare_config(1);
  cfg.T = 5;
  CHECK(simulate(cfg).data.times() ==
        std::vector<std::string>{"t01", "t02", "t03", "t04", "t05"});

  // Width grows with T (one digit of headroom) so labels always sort
  // lexicographically in period order.
  cfg.T = 120;
  const auto labels = simulate(cfg).data.times();
  CHECK(labels.front() == "t0001");
  CHECK(labels.back() == "t0120");
  CHECK(std::is_sorted(labels.begin(), labels.end()));
}

TEST_CASE("per-period group sizes are honored") {
  SimConfig cfg = svare_config(3);
  cfg.T = 3;
  cfg.group_sizes = {2, 5, 3};
  const SimResult r = simulate(cfg);
  CHECK(r.data.groups[0].y.size() == 2);
  CHECK(r.data.groups[1].y.size() == 5);
  CHECK(r.data.groups[2].y.size() == 3);
  CHECK(r.data.n_total() == 10);
  CHECK(r.data.covariate_names == std::vector<std::string>{"x1"});

  cfg.group_sizes = {2, 5};  // wrong length
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  cfg.group_sizes = {2, 5, 0};  // empty group
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  cfg.group_sizes = {2, 5, 3};
  cfg.svare.beta = Eigen::VectorXd(2);  // beta/k mismatch
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
}

TEST_CASE("each model family produces its own data-generating process") {
  SimConfig cfg;
  cfg.model = SimModel::FE;
  cfg.T = 3;
  cfg.group_sizes = {2000};
  cfg.k = 0;
  cfg.seed = 17;
  cfg.fe.beta0_t = Eigen::VectorXd(3);
  cfg.fe.beta0_t << 1.0, -0.5, 2.0;
  cfg.fe.sigma2 = 0.04;
  const SimResult fe = simulate(cfg);
  // With 2000 draws per period the group means pin the intercepts tightly.
  for (int t = 0; t < 3; ++t) {
    CHECK(fe.data.groups[t].y.mean() ==
          doctest::Approx(cfg.fe.beta0_t[t]).epsilon(0.05));
    CHECK(fe.u[t] == cfg.fe.beta0_t[t]);
    CHECK(fe.h[t] == doctest::Approx(std::log(cfg.fe.sigma2)).epsilon(1e-12));
  }
  // FE requires intercepts of length T.
  cfg.fe.beta0_t = Eigen::VectorXd(2);
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);

  SimConfig ac;
  ac.model = SimModel::ARE;
  ac.T = 4;
  ac.group_sizes = {3};
  ac.seed = 23;
  ac.are.beta0 = 0.7;
  ac.are.rho = 0.5;
  ac.are.sigma2_eta = 0.09;
  ac.are.sigma2 = 0.16;
  const SimResult are = simulate(ac);
  CHECK(are.u.size() == 4);
  // ARE has constant level-1 variance: h is the log of sigma2 throughout.
  for (int t = 0; t < 4; ++t)
    CHECK(are.h[t] == doctest::Approx(std::log(0.16)).epsilon(1e-12));
}

TEST_CASE("the tensor oracle reproduces an externally computed likelihood") {
  // The same T=2 dataset/parameters/grid pinned in the svcore suite; the
  // reference value comes from an independent numpy dense summation.
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

  SvareParams p;
  p.beta0 = 0.2;
  p.beta = Eigen::VectorXd(1);
  p.beta << 0.4;
  p.rho = 0.7;
  p.sigma_eta = 0.3;
  p.alpha = -0.5;
  p.delta = 0.8;
  p.sigma_nu = 0.4;

  const QuadGrid g = build_grid(p, 3, 3, 3.0);
  CHECK(oracle_loglik_tensor(d, p, g) ==
        doctest::Approx(-0.66108626087502254).epsilon(1e-12));

  const OracleMeans om = oracle_state_means(d, p, g);
  CHECK(om.filtered_u[0] == doctest::Approx(4.3983229322825224e-06).epsilon(1e-10));
  CHECK(om.filtered_h[0] == doctest::Approx(-2.5380608759644971).epsilon(1e-12));
  CHECK(om.smoothed_u[0] == doctest::Approx(3.3390199664080995e-05).epsilon(1e-10));
  CHECK(om.smoothed_h[0] == doctest::Approx(-2.4746657324484604).epsilon(1e-12));
  CHECK(om.smoothed_u[1] == doctest::Approx(0.014368213905472712).epsilon(1e-10));
  CHECK(om.predicted_u[0] == doctest::Approx(8.5565425461253546e-07).epsilon(1e-8));
  CHECK(om.predicted_h[0] == doctest::Approx(-2.5181113347697384).epsilon(1e-12));
  CHECK(om.predicted_u[1] == doctest::Approx(0.0056108172318111819).epsilon(1e-10));
  CHECK(om.predicted_h[1] == doctest::Approx(-2.4872390782866067).epsilon(1e-12));
}

TEST_CASE("oracle guards reject sizes that would never finish") {
  SimConfig cfg = svare_config(2);
  cfg.T = 4;  // too long for the tensor oracle
  const SimResult r4 = simulate(cfg);
  const QuadGrid g4 = build_grid(cfg.svare, 3, 3, 3.0);
  CHECK_THROWS_AS(oracle_loglik_tensor(r4.data, cfg.svare, g4), std::invalid_argument);
  CHECK_THROWS_AS(oracle_state_means(r4.data, cfg.svare, g4), std::invalid_argument);

  cfg.T = 2;
  const SimResult r2 = simulate(cfg);
  const QuadGrid g11 = build_grid(cfg.svare, 11, 3, 3.0);  // axis too dense
  CHECK_THROWS_AS(oracle_loglik_tensor(r2.data, cfg.svare, g11), std::invalid_argument);
}

TEST_CASE("monte-carlo and quadrature likelihoods agree within the error bar") {
  SimConfig cfg = svare_config(19);
  cfg.T = 3;
  cfg.group_sizes = {3};
  const SimResult sim = simulate(cfg);

  const auto [nu, nh] = default_point_counts(cfg.svare);
  const double ll = forward_loglik(sim.data, cfg.svare, build_grid(cfg.svare, nu, nh));
  const McLoglik mc = oracle_loglik_mc(sim.data, cfg.svare, 200000, 77);

  CHECK(mc.se_rel > 0.0);
  CHECK(mc.se_rel < 0.05);
  CHECK(std::abs(std::exp(mc.loglik - ll) - 1.0) <= 3.5 * mc.se_rel);

  // Deterministic under the seed.
  const McLoglik mc2 = oracle_loglik_mc(sim.data, cfg.svare, 200000, 77);
  CHECK(mc.loglik == mc2.loglik);
  CHECK(mc.se_rel == mc2.se_rel);

  CHECK_THROWS_AS(oracle_loglik_mc(sim.data, cfg.svare, 50, 1), std::invalid_argument);
}
