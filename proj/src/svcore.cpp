#include "svare/svcore.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace svare {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

// Scalar std::exp, not Eigen's vectorized exp: the packet implementation
// clamps deeply negative arguments at the smallest normal instead of
// flushing to zero, which plants phantom probability in cells the model
// rules out and can never let the starvation check fire. It also differs
// between packet lanes and the scalar tail, breaking kernel symmetry.
double exp_flush(double x) { return std::exp(x); }

// F(i, i') = Normal density of nodes[i] given mean intercept + ar*nodes[i'].
// Rows index the new state, columns the old; quadrature weights are applied
// separately, so entries are plain densities.
Eigen::MatrixXd transition_matrix(const Eigen::VectorXd& nodes, double ar, double intercept,
                                  double innov_var) {
  const Eigen::Index n = nodes.size();
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * innov_var);
  Eigen::MatrixXd F(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double mean = intercept + ar * nodes[c];
    F.col(c) =
        (-(nodes.array() - mean).square() / (2.0 * innov_var)).unaryExpr(&exp_flush) * norm;
  }
  return F;
}

Eigen::VectorXd normal_pdf(const Eigen::VectorXd& x, double mean, double var) {
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
  return ((-(x.array() - mean).square() / (2.0 * var)).unaryExpr(&exp_flush) * norm).matrix();
}

Eigen::MatrixXd obs_logdensity_from_stats(const GroupStats& s, const QuadGrid& g) {
  const Eigen::VectorXd& u = g.u.points;
  const Eigen::VectorXd& h = g.h.points;
  // Sum of squared deviations from each u node, via the sufficient statistics.
  const Eigen::VectorXd a = (s.s2 - 2.0 * s.s1 * u.array() + s.n * u.array().square()).matrix();
  const Eigen::RowVectorXd eh = (-h.array()).exp().matrix().transpose();
  Eigen::MatrixXd M = (-0.5 * a) * eh;
  M.rowwise() += (-0.5 * s.n * (kLog2Pi + h.array())).matrix().transpose();
  return M;
}

[[noreturn]] void throw_starvation(int t) {
  throw std::runtime_error(
      "grid starvation: total probability underflowed to zero at period " + std::to_string(t) +
      "; widen the grid (larger multiplier) or add quadrature points");
}

struct Kernels {
  Eigen::MatrixXd Fu, Fh, W;
  double jac = 0.0;
};

Kernels make_kernels(const SvareParams& p, const QuadGrid& g) {
  Kernels k;
  k.Fu = transition_matrix(g.u.points, p.rho, 0.0, p.sigma_eta * p.sigma_eta);
  k.Fh = transition_matrix(g.h.points, p.delta, p.alpha, p.sigma_nu * p.sigma_nu);
  k.W = g.u.weights * g.h.weights.transpose();
  k.jac = g.jacobian();
  return k;
}

double forward_impl(const Dataset& d, const SvareParams& p, const QuadGrid& g,
                    RecursionState* st) {
  d.validate();
  p.validate();
  if (static_cast<int>(p.beta.size()) != d.k())
    throw std::invalid_argument("forward: beta dimension does not match dataset");

  const auto stats = residual_stats(d, p);
  const int T = d.T();
  const Kernels k = make_kernels(p, g);
  const Eigen::MatrixXd prior =
      normal_pdf(g.u.points, 0.0, p.u_stationary_var()) *
      normal_pdf(g.h.points, p.h_stationary_mean(), p.h_stationary_var()).transpose();

  if (st) {
    st->grid = g;
    st->l.assign(T, {});
    st->c.resize(T);
    st->b.clear();
    st->cb.resize(0);
    st->has_backward = false;
  }

  double loglik = 0.0;
  Eigen::MatrixXd cur;
  for (int t = 0; t < T; ++t) {
    const Eigen::MatrixXd logM = obs_logdensity_from_stats(stats[t], g);
    const double m = logM.maxCoeff();
    Eigen::MatrixXd P;
    if (t == 0) {
      P = k.jac * (logM.array() - m).unaryExpr(&exp_flush) * k.W.array() * prior.array();
    } else {
      const Eigen::MatrixXd A = k.Fu * cur * k.Fh.transpose();
      P = k.jac * (logM.array() - m).unaryExpr(&exp_flush) * k.W.array() * A.array();
    }
    const double s = P.sum();
    if (!(s > 0.0) || !std::isfinite(s)) throw_starvation(t + 1);
    cur = P / s;
    const double ct = std::log(s) + m;
    loglik += ct;
    if (st) {
      st->l[t] = cur;
      st->c[t] = ct;
    }
  }
  return loglik;
}

}  // namespace

std::vector<GroupStats> residual_stats(const Dataset& d, const SvareParams& p) {
  std::vector<GroupStats> out(d.T());
  for (int t = 0; t < d.T(); ++t) {
    const auto& g = d.groups[t];
    const Eigen::VectorXd r = g.y.array() - p.beta0 - (g.X * p.beta).array();
    out[t] = {static_cast<double>(r.size()), r.sum(), r.squaredNorm()};
  }
  return out;
}

Eigen::MatrixXd obs_logdensity_grid(const Dataset& d, int t, const SvareParams& p,
                                    const QuadGrid& g) {
  if (t < 0 || t >= d.T()) throw std::invalid_argument("obs_logdensity_grid: t out of range");
  const auto& grp = d.groups[t];
  const Eigen::VectorXd r = grp.y.array() - p.beta0 - (grp.X * p.beta).array();
  const GroupStats s{static_cast<double>(r.size()), r.sum(), r.squaredNorm()};
  return obs_logdensity_from_stats(s, g);
}

double forward_loglik(const Dataset& d, const SvareParams& p, const QuadGrid& g) {
  return forward_impl(d, p, g, nullptr);
}

RecursionState forward(const Dataset& d, const SvareParams& p, const QuadGrid& g) {
  RecursionState st;
  forward_impl(d, p, g, &st);
  return st;
}

void backward(const Dataset& d, const SvareParams& p, RecursionState& st) {
  const auto stats = residual_stats(d, p);
  const int T = d.T();
  if (static_cast<int>(st.l.size()) != T)
    throw std::invalid_argument("backward: forward pass missing or mismatched");
  const QuadGrid& g = st.grid;
  const Kernels k = make_kernels(p, g);
  const double nn = static_cast<double>(g.nu()) * g.nh();

  st.b.assign(T, {});
  st.cb.resize(T);
  st.b[T - 1] = Eigen::MatrixXd::Constant(g.nu(), g.nh(), 1.0 / nn);
  st.cb[T - 1] = std::log(nn);
  for (int t = T - 2; t >= 0; --t) {
    const Eigen::MatrixXd logM = obs_logdensity_from_stats(stats[t + 1], g);
    const double m = logM.maxCoeff();
    // Weights sit on the summed (t+1) index: b_t = jac * Fu' (W o f_{t+1} o b_{t+1}) Fh.
    const Eigen::MatrixXd Q =
        ((logM.array() - m).unaryExpr(&exp_flush) * k.W.array() * st.b[t + 1].array()).matrix();
    Eigen::MatrixXd B = k.jac * (k.Fu.transpose() * Q * k.Fh);
    const double s = B.sum();
    if (!(s > 0.0) || !std::isfinite(s)) throw_starvation(t + 1);
    st.b[t] = B / s;
    st.cb[t] = st.cb[t + 1] + std::log(s) + m;
  }
  st.has_backward = true;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> filter_states(const RecursionState& st) {
  const int T = static_cast<int>(st.l.size());
  Eigen::VectorXd fu(T), fh(T);
  for (int t = 0; t < T; ++t) {
    const double total = st.l[t].sum();
    fu[t] = st.grid.u.points.dot(st.l[t].rowwise().sum()) / total;
    fh[t] = st.grid.h.points.dot(st.l[t].colwise().sum().transpose()) / total;
  }
  return {fu, fh};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> smooth_states(const RecursionState& st) {
  if (!st.has_backward) throw std::invalid_argument("smooth_states: backward pass missing");
  const int T = static_cast<int>(st.l.size());
  Eigen::VectorXd su(T), sh(T);
  for (int t = 0; t < T; ++t) {
    // Scale factors cancel in the self-normalized means. At the last period
    // b_T is constant by construction, so dropping it keeps the documented
    // smoothed == filtered identity exact to the last bit.
    const Eigen::MatrixXd J = (t == T - 1) ? st.l[t] : st.l[t].cwiseProduct(st.b[t]).eval();
    const double total = J.sum();
    su[t] = st.grid.u.points.dot(J.rowwise().sum()) / total;
    sh[t] = st.grid.h.points.dot(J.colwise().sum().transpose()) / total;
  }
  return {su, sh};
}

std::pair<double, double> predict_states(const RecursionState& st, const SvareParams& p,
                                         int target_t) {
  const int T = static_cast<int>(st.l.size());
  if (target_t < 2 || target_t > T + 1)
    throw std::invalid_argument("predict_states: target must lie in [2, T+1]");
  const Kernels k = make_kernels(p, st.grid);
  // One transition step with no data update, then grid means of the joint.
  const Eigen::MatrixXd P =
      (k.W.array() * (k.Fu * st.l[target_t - 2] * k.Fh.transpose()).array()).matrix();
  const double total = P.sum();
  return {st.grid.u.points.dot(P.rowwise().sum()) / total,
          st.grid.h.points.dot(P.colwise().sum().transpose()) / total};
}

StateEstimates estimate_states(const Dataset& d, const SvareParams& p, RecursionState& st) {
  if (!st.has_backward) backward(d, p, st);
  const int T = d.T();

  StateEstimates est;
  std::tie(est.filtered_u, est.filtered_h) = filter_states(st);
  std::tie(est.smoothed_u, est.smoothed_h) = smooth_states(st);

  est.predicted_u.resize(T);
  est.predicted_h.resize(T);
  const Kernels k = make_kernels(p, st.grid);
  for (int s = 0; s < T; ++s) {
    const Eigen::MatrixXd P =
        (k.W.array() * (k.Fu * st.l[s] * k.Fh.transpose()).array()).matrix();
    const double total = P.sum();
    est.predicted_u[s] = st.grid.u.points.dot(P.rowwise().sum()) / total;
    est.predicted_h[s] = st.grid.h.points.dot(P.colwise().sum().transpose()) / total;
  }

  est.level1_std_residuals.resize(T);
  for (int t = 0; t < T; ++t) {
    const auto& g = d.groups[t];
    const double scale = std::exp(-0.5 * est.smoothed_h[t]);
    est.level1_std_residuals[t] =
        scale * ((g.y.array() - p.beta0 - est.smoothed_u[t]).matrix() - g.X * p.beta);
  }

  est.level2_eta.resize(T);
  est.level2_nu.resize(T);
  est.level2_eta[0] = est.smoothed_u[0] * std::sqrt(1.0 - p.rho * p.rho);
  est.level2_nu[0] = (est.smoothed_h[0] - p.h_stationary_mean()) *
                     std::sqrt(1.0 - p.delta * p.delta) / p.sigma_nu;
  for (int t = 1; t < T; ++t) {
    est.level2_eta[t] = est.smoothed_u[t] - p.rho * est.smoothed_u[t - 1];
    est.level2_nu[t] =
        (est.smoothed_h[t] - p.alpha - p.delta * est.smoothed_h[t - 1]) / p.sigma_nu;
  }
  return est;
}

Eigen::VectorXd predict_prices(const Eigen::MatrixXd& X_new, const StateEstimates& est,
                               const SvareParams& p) {
  if (X_new.cols() != p.beta.size())
    throw std::invalid_argument("predict_prices: covariate dimension mismatch");
  if (est.predicted_u.size() == 0)
    throw std::invalid_argument("predict_prices: no forecasted state available");
  const double u_next = est.predicted_u[est.predicted_u.size() - 1];
  return (p.beta0 + u_next + (X_new * p.beta).array()).matrix();
}

}  // namespace svare
