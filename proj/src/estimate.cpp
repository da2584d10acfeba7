#include "svare/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace svare {

namespace {

constexpr double kSigmaFloor = 1e-6;  // below this the grid collapses
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_atanh(double x) { return std::atanh(std::clamp(x, -0.999999, 0.999999)); }

}  // namespace

Eigen::VectorXd to_unconstrained(const SvareParams& p) {
  const int k = p.k();
  Eigen::VectorXd z(k + 6);
  z[0] = p.beta0;
  z.segment(1, k) = p.beta;
  z[k + 1] = safe_atanh(p.rho);
  z[k + 2] = std::log(std::max(p.sigma_eta, kSigmaFloor));
  z[k + 3] = p.alpha;
  z[k + 4] = safe_atanh(p.delta);
  z[k + 5] = std::log(std::max(p.sigma_nu, kSigmaFloor));
  return z;
}

SvareParams from_unconstrained(const Eigen::VectorXd& z, int k) {
  if (z.size() != k + 6)
    throw std::invalid_argument("from_unconstrained: expected k + 6 coordinates");
  SvareParams p;
  p.beta0 = z[0];
  p.beta = z.segment(1, k);
  p.rho = std::tanh(z[k + 1]);
  p.sigma_eta = std::exp(z[k + 2]);
  p.alpha = z[k + 3];
  p.delta = std::tanh(z[k + 4]);
  p.sigma_nu = std::exp(z[k + 5]);
  return p;
}

SvareParams sv_starting_values(const Dataset& d, const AreFit& are_fit, int ma_window) {
  if (ma_window < 1 || ma_window % 2 == 0)
    throw std::invalid_argument("sv_starting_values: ma_window must be odd and positive");
  const auto& resid = are_fit.filter.level1_residuals;
  if (static_cast<int>(resid.size()) != d.T())
    throw std::invalid_argument("sv_starting_values: ARE fit lacks level-1 residuals");

  const int T = d.T();
  Eigen::VectorXd hstar(T);
  for (int t = 0; t < T; ++t)
    hstar[t] = resid[t].array().square().max(1e-12).log().mean() + 1.27;

  // Centered moving average, window shrinking near the ends.
  Eigen::VectorXd smooth(T);
  const int hw = ma_window / 2;
  for (int t = 0; t < T; ++t) {
    const int lo = std::max(0, t - hw);
    const int hi = std::min(T - 1, t + hw);
    smooth[t] = hstar.segment(lo, hi - lo + 1).mean();
  }

  SvareParams p;
  p.beta0 = are_fit.params.beta0;
  p.beta = are_fit.params.beta;
  p.rho = std::clamp(are_fit.params.rho, -0.95, 0.95);
  p.sigma_eta = std::max(std::sqrt(are_fit.params.sigma2_eta), 1e-3);

  const int m = T - 1;  // regression points of h*_t on h*_{t-1}
  if (m >= 2) {
    const Eigen::VectorXd x = smooth.head(m);
    const Eigen::VectorXd y = smooth.tail(m);
    const double xbar = x.mean(), ybar = y.mean();
    const double sxx = (x.array() - xbar).square().sum();
    double slope = sxx > 1e-12 ? (x.array() - xbar).matrix().dot((y.array() - ybar).matrix()) / sxx
                               : 0.0;
    slope = std::clamp(slope, -0.95, 0.95);
    const double intercept = ybar - slope * xbar;
    const Eigen::VectorXd res = y.array() - intercept - slope * x.array();
    p.delta = slope;
    p.alpha = intercept;
    p.sigma_nu = std::max(std::sqrt(res.squaredNorm() / m), 0.05);
  } else {
    p.delta = 0.0;
    p.alpha = smooth.mean();
    p.sigma_nu = 0.05;
  }
  return p;
}

namespace {

// Shared likelihood evaluation: rebuild the grid around the current
// parameters (fixed sizes), return -inf on infeasible regions including
// grid starvation so the line search backs off.
double penalized_loglik(const Dataset& d, const SvareParams& p, int n_u, int n_h, double mult) {
  if (p.sigma_eta < kSigmaFloor || p.sigma_nu < kSigmaFloor) return kNegInf;
  if (!(std::abs(p.rho) < 1.0 && std::abs(p.delta) < 1.0)) return kNegInf;
  if (!std::isfinite(p.sigma_eta) || !std::isfinite(p.sigma_nu) ||
      !std::isfinite(p.h_stationary_mean()))
    return kNegInf;
  try {
    return forward_loglik(d, p, build_grid(p, n_u, n_h, mult));
  } catch (const std::runtime_error&) {
    return kNegInf;  // grid starvation at an extreme parameter point
  }
}

}  // namespace

SvareFit fit_svare(const Dataset& d, const std::optional<SvareParams>& start,
                   const FitOptions& opts) {
  d.validate();
  const int k = d.k();

  SvareParams p0;
  if (start) {
    p0 = *start;
    p0.validate();
    if (p0.k() != k) throw std::invalid_argument("fit_svare: starting beta dimension mismatch");
  } else {
    p0 = sv_starting_values(d, fit_are(d), opts.ma_window);
  }

  // Grid sizes resolved once so the objective stays continuous in theta;
  // bounds still track the current parameters at every evaluation.
  auto [n_u, n_h] = default_point_counts(p0, opts.grid_mult);
  if (opts.n_u > 0) n_u = opts.n_u;
  if (opts.n_h > 0) n_h = opts.n_h;

  const ObjectiveFn objective = [&](const Eigen::VectorXd& z) {
    if (z.lpNorm<Eigen::Infinity>() > 50.0) return kNegInf;
    return penalized_loglik(d, from_unconstrained(z, k), n_u, n_h, opts.grid_mult);
  };

  const OptimResult r = maximize(objective, to_unconstrained(p0), opts.optim);

  SvareFit fit;
  fit.params = from_unconstrained(r.x, k);
  fit.loglik = r.f;
  fit.n_params = k + 6;
  fit.aic = aic(fit.loglik, fit.n_params);
  fit.bic = bic(fit.loglik, fit.n_params, d.n_total());
  fit.convergence = summarize(r);
  fit.n_u = n_u;
  fit.n_h = n_h;
  fit.grid_mult = opts.grid_mult;

  fit.param_names.push_back("beta0");
  for (const auto& name : d.covariate_names) fit.param_names.push_back("beta:" + name);
  fit.param_names.insert(fit.param_names.end(),
                         {"rho", "sigma_eta", "alpha", "delta", "sigma_nu"});

  // Delta method from the unconstrained space to the natural parameters.
  const int nz = k + 6;
  fit.se = Eigen::VectorXd::Zero(nz);
  const Eigen::MatrixXd H = numerical_hessian(objective, r.x, 1e-4);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
  if (H.allFinite() && ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(nz, nz));
    Eigen::VectorXd jac = Eigen::VectorXd::Ones(nz);
    jac[k + 1] = 1.0 - fit.params.rho * fit.params.rho;
    jac[k + 2] = fit.params.sigma_eta;
    jac[k + 4] = 1.0 - fit.params.delta * fit.params.delta;
    jac[k + 5] = fit.params.sigma_nu;
    const Eigen::VectorXd var = cov.diagonal().cwiseMax(0.0);
    fit.se = jac.cwiseAbs().cwiseProduct(var.cwiseSqrt());
    fit.se_valid = true;
  }

  RecursionState st = forward(d, fit.params, build_grid(fit.params, n_u, n_h, opts.grid_mult));
  fit.states = estimate_states(d, fit.params, st);
  return fit;
}

std::vector<ProfilePoint> profile_check(const Dataset& d, const SvareFit& fit,
                                        const std::string& param, double span_se, int points) {
  if (points < 2) throw std::invalid_argument("profile_check: need at least 2 points");
  const auto it = std::find(fit.param_names.begin(), fit.param_names.end(), param);
  if (it == fit.param_names.end())
    throw std::invalid_argument("profile_check: unknown parameter '" + param + "'");
  const int idx = static_cast<int>(it - fit.param_names.begin());
  if (!fit.se_valid || !(fit.se[idx] > 0.0))
    throw std::invalid_argument("profile_check: no usable standard error for '" + param + "'");

  const int k = d.k();
  const auto apply = [&](SvareParams p, double v) {
    if (idx == 0) p.beta0 = v;
    else if (idx <= k) p.beta[idx - 1] = v;
    else if (idx == k + 1) p.rho = std::clamp(v, -0.999, 0.999);
    else if (idx == k + 2) p.sigma_eta = std::max(v, kSigmaFloor);
    else if (idx == k + 3) p.alpha = v;
    else if (idx == k + 4) p.delta = std::clamp(v, -0.999, 0.999);
    else p.sigma_nu = std::max(v, kSigmaFloor);
    return p;
  };

  const double center = idx == 0          ? fit.params.beta0
                        : idx <= k        ? fit.params.beta[idx - 1]
                        : idx == k + 1    ? fit.params.rho
                        : idx == k + 2    ? fit.params.sigma_eta
                        : idx == k + 3    ? fit.params.alpha
                        : idx == k + 4    ? fit.params.delta
                                          : fit.params.sigma_nu;
  const double half = span_se * fit.se[idx];

  std::vector<ProfilePoint> curve(points);
  for (int i = 0; i < points; ++i) {
    const double v = center - half + 2.0 * half * i / (points - 1);
    const SvareParams p = apply(fit.params, v);
    curve[i] = {v, penalized_loglik(d, p, fit.n_u, fit.n_h, fit.grid_mult)};
  }
  return curve;
}

}  // namespace svare
