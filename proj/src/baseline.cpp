#include "svare/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace svare {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

// Per-group sufficient statistics of the partial residuals r = y - beta0 - X*beta.
struct GroupSuff {
  double n = 0.0;
  double mean = 0.0;
  double ssw = 0.0;  // within-group sum of squares around the mean
};

std::vector<GroupSuff> partial_residual_stats(const Dataset& d, double beta0,
                                              const Eigen::VectorXd& beta) {
  std::vector<GroupSuff> out(d.T());
  for (int t = 0; t < d.T(); ++t) {
    const auto& g = d.groups[t];
    const Eigen::VectorXd r = g.y.array() - beta0 - (g.X * beta).array();
    GroupSuff& s = out[t];
    s.n = static_cast<double>(r.size());
    s.mean = r.mean();
    s.ssw = (r.array() - s.mean).square().sum();
  }
  return out;
}

// Scalar Kalman filter over the collapsed group means. Fills the filter and
// one-step-ahead arrays; returns the exact marginal loglik.
struct FilterArrays {
  Eigen::VectorXd a, P;  // predicted mean/var of u_t given Y_{t-1}
  Eigen::VectorXd m, V;  // filtered mean/var of u_t given Y_t
};

double kalman_loglik(const std::vector<GroupSuff>& suff, const AreParams& p, FilterArrays* fa) {
  const int T = static_cast<int>(suff.size());
  fa->a.resize(T);
  fa->P.resize(T);
  fa->m.resize(T);
  fa->V.resize(T);

  double ll = 0.0;
  double a = 0.0;
  double P = p.u_stationary_var();
  for (int t = 0; t < T; ++t) {
    const GroupSuff& s = suff[t];
    const double obs_var = p.sigma2 / s.n;
    const double v = s.mean - a;
    const double F = P + obs_var;
    ll += -0.5 * (std::log(2.0 * std::numbers::pi * F) + v * v / F);
    // Collapsing n_t observations to their mean leaves this data-dependent
    // remainder, exact for the Gaussian family.
    ll += -0.5 * (s.n - 1.0) * (kLog2Pi + std::log(p.sigma2)) - 0.5 * std::log(s.n) -
          s.ssw / (2.0 * p.sigma2);

    const double gain = P / F;
    fa->a[t] = a;
    fa->P[t] = P;
    fa->m[t] = a + gain * v;
    fa->V[t] = P - gain * P;

    a = p.rho * fa->m[t];
    P = p.rho * p.rho * fa->V[t] + p.sigma2_eta;
  }
  return ll;
}

GaussianFilterOutput run_filter(const Dataset& d, const AreParams& p, bool with_residuals) {
  p.validate();
  const auto suff = partial_residual_stats(d, p.beta0, p.beta);

  GaussianFilterOutput out;
  FilterArrays fa;
  out.loglik = kalman_loglik(suff, p, &fa);
  out.filtered_u = fa.m;
  out.filtered_var = fa.V;

  // Rauch-Tung-Striebel smoother.
  const int T = d.T();
  out.smoothed_u.resize(T);
  out.smoothed_var.resize(T);
  out.smoothed_u[T - 1] = fa.m[T - 1];
  out.smoothed_var[T - 1] = fa.V[T - 1];
  for (int t = T - 2; t >= 0; --t) {
    const double Pnext = fa.P[t + 1];
    const double G = Pnext > 0.0 ? p.rho * fa.V[t] / Pnext : 0.0;
    out.smoothed_u[t] = fa.m[t] + G * (out.smoothed_u[t + 1] - fa.a[t + 1]);
    out.smoothed_var[t] = fa.V[t] + G * G * (out.smoothed_var[t + 1] - Pnext);
  }

  out.level2_residuals.resize(T);
  out.level2_residuals[0] = out.smoothed_u[0] * std::sqrt(1.0 - p.rho * p.rho);
  for (int t = 1; t < T; ++t)
    out.level2_residuals[t] = out.smoothed_u[t] - p.rho * out.smoothed_u[t - 1];

  if (with_residuals) {
    out.level1_residuals.resize(T);
    for (int t = 0; t < T; ++t) {
      const auto& g = d.groups[t];
      out.level1_residuals[t] =
          (g.y.array() - p.beta0 - out.smoothed_u[t]).matrix() - g.X * p.beta;
    }
  }
  return out;
}

}  // namespace

FeFit fit_fe(const Dataset& d) {
  d.validate();
  const int T = d.T();
  const int k = d.k();
  const int dim = T + k;
  const int n = d.n_total();

  // Normal equations of the stacked [time dummies | X] design, assembled
  // group by group so the n x dim matrix is never formed.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (int t = 0; t < T; ++t) {
    const auto& g = d.groups[t];
    M(t, t) = static_cast<double>(g.y.size());
    const Eigen::RowVectorXd colsum = g.X.colwise().sum();
    M.block(t, T, 1, k) = colsum;
    M.block(T, t, k, 1) = colsum.transpose();
    M.block(T, T, k, k) += g.X.transpose() * g.X;
    rhs[t] = g.y.sum();
    rhs.segment(T, k) += g.X.transpose() * g.y;
  }

  const auto column_name = [&](int j) {
    return j < T ? "time:" + d.groups[j].label : d.covariate_names[j - T];
  };
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  if (qr.rank() < dim) {
    std::string names;
    const auto perm = qr.colsPermutation().indices();
    for (int r = qr.rank(); r < dim; ++r)
      names += (names.empty() ? "" : ", ") + column_name(perm[r]);
    throw std::invalid_argument("fit_fe: design is rank deficient; collinear columns: " + names);
  }
  const Eigen::VectorXd theta = qr.solve(rhs);

  FeFit fit;
  fit.params.beta0_t = theta.head(T);
  fit.params.beta = theta.tail(k);

  double rss = 0.0;
  fit.residuals.resize(T);
  for (int t = 0; t < T; ++t) {
    const auto& g = d.groups[t];
    fit.residuals[t] = (g.y.array() - fit.params.beta0_t[t]).matrix() - g.X * fit.params.beta;
    rss += fit.residuals[t].squaredNorm();
  }
  fit.params.sigma2 = rss / n;

  fit.loglik = -0.5 * n * (kLog2Pi + std::log(fit.params.sigma2) + 1.0);
  fit.n_params = T + k + 1;
  fit.aic = aic(fit.loglik, fit.n_params);
  fit.bic = bic(fit.loglik, fit.n_params, n);

  const Eigen::MatrixXd Minv = qr.solve(Eigen::MatrixXd::Identity(dim, dim));
  const Eigen::VectorXd se = (Minv.diagonal() * fit.params.sigma2).cwiseMax(0.0).cwiseSqrt();
  fit.se_beta0_t = se.head(T);
  fit.se_beta = se.tail(k);
  return fit;
}

GaussianFilterOutput are_loglik(const Dataset& d, const AreParams& p) {
  d.validate();
  return run_filter(d, p, /*with_residuals=*/true);
}

namespace {

AreParams default_are_start(const Dataset& d) {
  const FeFit fe = fit_fe(d);
  const int T = d.T();

  AreParams p;
  p.beta0 = fe.params.beta0_t.mean();
  p.beta = fe.params.beta;
  p.sigma2 = fe.params.sigma2;

  const Eigen::VectorXd u = fe.params.beta0_t.array() - p.beta0;
  const double denom = u.squaredNorm();
  double rho = 0.0;
  if (T >= 3 && denom > 1e-12) {
    rho = u.tail(T - 1).dot(u.head(T - 1)) / denom;
    rho = std::clamp(rho, -0.95, 0.95);
  }
  p.rho = rho;
  p.sigma2_eta = std::max((denom / T) * (1.0 - rho * rho), 1e-6);
  return p;
}

}  // namespace

AreFit fit_are(const Dataset& d, const std::optional<AreParams>& start,
               const OptimOptions& opts) {
  d.validate();
  const int k = d.k();
  const AreParams p0 = start.value_or(default_are_start(d));
  p0.validate();
  if (static_cast<int>(p0.beta.size()) != k)
    throw std::invalid_argument("fit_are: starting beta dimension mismatch");

  // Unconstrained coordinates: [beta0, beta, atanh(rho), log sd_eta, log sd].
  const int nz = k + 4;
  Eigen::VectorXd z0(nz);
  z0[0] = p0.beta0;
  z0.segment(1, k) = p0.beta;
  z0[k + 1] = std::atanh(std::clamp(p0.rho, -0.999999, 0.999999));
  z0[k + 2] = 0.5 * std::log(std::max(p0.sigma2_eta, 1e-12));
  z0[k + 3] = 0.5 * std::log(p0.sigma2);

  const auto unpack = [k](const Eigen::VectorXd& z) {
    AreParams p;
    p.beta0 = z[0];
    p.beta = z.segment(1, k);
    p.rho = std::tanh(z[k + 1]);
    p.sigma2_eta = std::exp(2.0 * z[k + 2]);
    p.sigma2 = std::exp(2.0 * z[k + 3]);
    return p;
  };
  const ObjectiveFn objective = [&](const Eigen::VectorXd& z) {
    if (z.lpNorm<Eigen::Infinity>() > 50.0) return -std::numeric_limits<double>::infinity();
    FilterArrays fa;
    const AreParams p = unpack(z);
    return kalman_loglik(partial_residual_stats(d, p.beta0, p.beta), p, &fa);
  };

  const OptimResult r = maximize(objective, z0, opts);

  AreFit fit;
  fit.params = unpack(r.x);
  fit.loglik = r.f;
  fit.n_params = k + 4;
  fit.aic = aic(fit.loglik, fit.n_params);
  fit.bic = bic(fit.loglik, fit.n_params, d.n_total());
  fit.convergence = summarize(r);
  fit.filter = run_filter(d, fit.params, /*with_residuals=*/true);

  fit.param_names.push_back("beta0");
  for (const auto& name : d.covariate_names) fit.param_names.push_back("beta:" + name);
  fit.param_names.insert(fit.param_names.end(), {"rho", "sigma2_eta", "sigma2"});

  // Delta method from the unconstrained space to the natural parameters.
  fit.se = Eigen::VectorXd::Zero(nz);
  const Eigen::MatrixXd H = numerical_hessian(objective, r.x, 1e-4);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
  if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(nz, nz));
    Eigen::VectorXd jac = Eigen::VectorXd::Ones(nz);
    jac[k + 1] = 1.0 - fit.params.rho * fit.params.rho;
    jac[k + 2] = 2.0 * fit.params.sigma2_eta;
    jac[k + 3] = 2.0 * fit.params.sigma2;
    const Eigen::VectorXd var = cov.diagonal().cwiseMax(0.0);
    fit.se = jac.cwiseAbs().cwiseProduct(var.cwiseSqrt());
    fit.se_valid = true;
  }
  return fit;
}

}  // namespace svare
