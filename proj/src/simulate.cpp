#include "svare/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "svare/rng.hpp"
#include "svare/svcore.hpp"

namespace svare {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> resolve_sizes(const SimConfig& cfg) {
  if (cfg.T < 1) throw std::invalid_argument("simulate: T must be >= 1");
  if (cfg.k < 0) throw std::invalid_argument("simulate: k must be >= 0");
  std::vector<int> sizes = cfg.group_sizes;
  if (sizes.empty()) throw std::invalid_argument("simulate: group_sizes must not be empty");
  if (sizes.size() == 1) sizes.assign(cfg.T, sizes[0]);
  if (static_cast<int>(sizes.size()) != cfg.T)
    throw std::invalid_argument("simulate: group_sizes must have 1 or T entries");
  for (int n : sizes)
    if (n < 1) throw std::invalid_argument("simulate: every group size must be >= 1");
  return sizes;
}

std::string period_label(int t, int T) {
  const int width = T >= 1000 ? 5 : T >= 100 ? 4 : T >= 10 ? 3 : 2;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%0*d", width, t + 1);
  return buf;
}

}  // namespace

SimResult simulate(const SimConfig& cfg) {
  const std::vector<int> sizes = resolve_sizes(cfg);
  const int T = cfg.T;

  SimResult out;
  out.u.setZero(T);
  out.h.setZero(T);

  // Latent paths first, from their own streams.
  Philox u_rng(cfg.seed, 0);
  Philox h_rng(cfg.seed, 1);
  switch (cfg.model) {
    case SimModel::FE: {
      cfg.fe.validate();
      if (static_cast<int>(cfg.fe.beta0_t.size()) != T)
        throw std::invalid_argument("simulate: FE beta0_t must have length T");
      out.u = cfg.fe.beta0_t;
      out.h.setConstant(std::log(cfg.fe.sigma2));
      break;
    }
    case SimModel::ARE: {
      cfg.are.validate();
      out.u[0] = u_rng.next_normal(0.0, std::sqrt(cfg.are.u_stationary_var()));
      const double sd = std::sqrt(cfg.are.sigma2_eta);
      for (int t = 1; t < T; ++t)
        out.u[t] = cfg.are.rho * out.u[t - 1] + u_rng.next_normal(0.0, sd);
      out.h.setConstant(std::log(cfg.are.sigma2));
      break;
    }
    case SimModel::SVARE: {
      cfg.svare.validate();
      out.u[0] = u_rng.next_normal(0.0, cfg.svare.u_stationary_sd());
      for (int t = 1; t < T; ++t)
        out.u[t] = cfg.svare.rho * out.u[t - 1] + u_rng.next_normal(0.0, cfg.svare.sigma_eta);
      out.h[0] = h_rng.next_normal(cfg.svare.h_stationary_mean(), cfg.svare.h_stationary_sd());
      for (int t = 1; t < T; ++t)
        out.h[t] = cfg.svare.alpha + cfg.svare.delta * out.h[t - 1] +
                   h_rng.next_normal(0.0, cfg.svare.sigma_nu);
      break;
    }
  }

  const Eigen::VectorXd* beta = nullptr;
  double beta0 = 0.0;
  switch (cfg.model) {
    case SimModel::FE: beta = &cfg.fe.beta; break;
    case SimModel::ARE: beta = &cfg.are.beta; beta0 = cfg.are.beta0; break;
    case SimModel::SVARE: beta = &cfg.svare.beta; beta0 = cfg.svare.beta0; break;
  }
  if (static_cast<int>(beta->size()) != cfg.k)
    throw std::invalid_argument("simulate: beta dimension must equal k");

  out.data.covariate_names.clear();
  for (int j = 0; j < cfg.k; ++j) out.data.covariate_names.push_back("x" + std::to_string(j + 1));

  for (int t = 0; t < T; ++t) {
    Philox g_rng(cfg.seed, 2 + static_cast<std::uint64_t>(t));
    TimeGroup g;
    g.label = period_label(t, T);
    const int n = sizes[t];
    g.X.resize(n, cfg.k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < cfg.k; ++j) g.X(i, j) = g_rng.next_normal();
    g.y.resize(n);

    const double level = (cfg.model == SimModel::FE ? out.u[t] : beta0 + out.u[t]);
    const double noise_sd = std::exp(0.5 * out.h[t]);
    for (int i = 0; i < n; ++i)
      g.y[i] = level + g.X.row(i).dot(*beta) + noise_sd * g_rng.next_normal();
    out.data.groups.push_back(std::move(g));
  }
  out.data.validate();
  return out;
}

namespace {

// Precomputed log factors shared by the brute-force oracles.
struct TensorParts {
  int T = 0, nu = 0, nh = 0;
  std::vector<Eigen::MatrixXd> logM;  // per-period observation log-density
  Eigen::MatrixXd lw;                 // log(w_u w_h' * jac), the per-step node weight
  Eigen::MatrixXd lprior;             // log stationary density at the nodes
  Eigen::MatrixXd lFu, lFh;           // log transition densities (new index first)
};

TensorParts tensor_parts(const Dataset& d, const SvareParams& p, const QuadGrid& g) {
  if (d.T() > 3 || g.nu() > 9 || g.nh() > 9)
    throw std::invalid_argument("tensor oracle: size guard T <= 3, n_u, n_h <= 9 violated");
  p.validate();

  TensorParts tp;
  tp.T = d.T();
  tp.nu = g.nu();
  tp.nh = g.nh();
  tp.logM.resize(tp.T);
  for (int t = 0; t < tp.T; ++t) tp.logM[t] = obs_logdensity_grid(d, t, p, g);

  tp.lw = (g.u.weights * g.h.weights.transpose()).array().log() + std::log(g.jacobian());

  const auto log_normal = [](const Eigen::VectorXd& x, double mean, double var) {
    return (-0.5 * ((x.array() - mean).square() / var + kLog2Pi + std::log(var))).matrix();
  };
  const Eigen::VectorXd lu = log_normal(g.u.points, 0.0, p.u_stationary_var());
  const Eigen::VectorXd lh = log_normal(g.h.points, p.h_stationary_mean(), p.h_stationary_var());
  tp.lprior = lu.rowwise().replicate(tp.nh);
  tp.lprior.rowwise() += lh.transpose();

  const double veta = p.sigma_eta * p.sigma_eta;
  const double vnu = p.sigma_nu * p.sigma_nu;
  tp.lFu.resize(tp.nu, tp.nu);
  for (int c = 0; c < tp.nu; ++c)
    tp.lFu.col(c) = log_normal(g.u.points, p.rho * g.u.points[c], veta);
  tp.lFh.resize(tp.nh, tp.nh);
  for (int c = 0; c < tp.nh; ++c)
    tp.lFh.col(c) = log_normal(g.h.points, p.alpha + p.delta * g.h.points[c], vnu);
  return tp;
}

// Streaming log-sum-exp accumulator that also carries numerators for the u
// and h means (signed, so only the common scale is tracked).
struct ScaledAccum {
  double m = kNegInf;
  double den = 0.0, num_u = 0.0, num_h = 0.0;

  void add(double logw, double uval, double hval) {
    if (logw == kNegInf) return;
    if (logw > m) {
      const double r = m == kNegInf ? 0.0 : std::exp(m - logw);
      den *= r;
      num_u *= r;
      num_h *= r;
      m = logw;
    }
    const double e = std::exp(logw - m);
    den += e;
    num_u += uval * e;
    num_h += hval * e;
  }

  double log_total() const { return m + std::log(den); }
  double mean_u() const { return num_u / den; }
  double mean_h() const { return num_h / den; }
};

// Enumerate all node paths of length `depth` (with data factors at every
// step) and feed the terminal state into `accum`. Extra transition-only step
// appended when `predict_next` is true.
void enumerate_paths(const TensorParts& tp, int depth, bool predict_next, ScaledAccum* accum,
                     const QuadGrid& g) {
  const int S = tp.nu * tp.nh;

  const auto terminal = [&](double acc, int i, int j) {
    if (!predict_next) {
      accum->add(acc, g.u.points[i], g.h.points[j]);
      return;
    }
    for (int s = 0; s < S; ++s) {
      const int ni = s % tp.nu, nj = s / tp.nu;
      accum->add(acc + tp.lw(ni, nj) + tp.lFu(ni, i) + tp.lFh(nj, j), g.u.points[ni],
                 g.h.points[nj]);
    }
  };

  // Depth-first product over periods; acc carries the running log weight.
  const auto step = [&](auto&& self, int t, int pi, int pj, double acc) -> void {
    for (int s = 0; s < S; ++s) {
      const int i = s % tp.nu, j = s / tp.nu;
      const double lw = acc + tp.lw(i, j) + tp.logM[t](i, j) +
                        (t == 0 ? tp.lprior(i, j) : tp.lFu(i, pi) + tp.lFh(j, pj));
      if (t == depth - 1) terminal(lw, i, j);
      else self(self, t + 1, i, j, lw);
    }
  };

  if (depth == 0) {  // prediction from the prior alone is not needed; guard anyway
    throw std::invalid_argument("tensor oracle: empty path");
  }
  step(step, 0, -1, -1, 0.0);
}

}  // namespace

double oracle_loglik_tensor(const Dataset& d, const SvareParams& p, const QuadGrid& g) {
  const TensorParts tp = tensor_parts(d, p, g);
  ScaledAccum acc;
  enumerate_paths(tp, tp.T, false, &acc, g);
  return acc.log_total();
}

OracleMeans oracle_state_means(const Dataset& d, const SvareParams& p, const QuadGrid& g) {
  const TensorParts tp = tensor_parts(d, p, g);
  const int T = tp.T;

  OracleMeans om;
  om.filtered_u.resize(T);
  om.filtered_h.resize(T);
  om.smoothed_u.resize(T);
  om.smoothed_h.resize(T);
  om.predicted_u.resize(T);
  om.predicted_h.resize(T);

  for (int t = 0; t < T; ++t) {
    ScaledAccum acc;
    enumerate_paths(tp, t + 1, false, &acc, g);
    om.filtered_u[t] = acc.mean_u();
    om.filtered_h[t] = acc.mean_h();
  }

  // Smoothed means need the state at an interior period of the full paths;
  // rerun the enumeration tracking each period in turn via a small wrapper.
  for (int t = 0; t < T; ++t) {
    ScaledAccum acc;
    const int S = tp.nu * tp.nh;
    const auto step = [&](auto&& self, int s_t, int pi, int pj, double a, double mu,
                          double mh) -> void {
      for (int s = 0; s < S; ++s) {
        const int i = s % tp.nu, j = s / tp.nu;
        const double lw = a + tp.lw(i, j) + tp.logM[s_t](i, j) +
                          (s_t == 0 ? tp.lprior(i, j) : tp.lFu(i, pi) + tp.lFh(j, pj));
        const double cu = s_t == t ? g.u.points[i] : mu;
        const double ch = s_t == t ? g.h.points[j] : mh;
        if (s_t == T - 1) acc.add(lw, cu, ch);
        else self(self, s_t + 1, i, j, lw, cu, ch);
      }
    };
    step(step, 0, -1, -1, 0.0, 0.0, 0.0);
    om.smoothed_u[t] = acc.mean_u();
    om.smoothed_h[t] = acc.mean_h();
  }

  // Predicted targets 2..T+1: data factors through target-1, one extra
  // transition-plus-weights step, no data update.
  for (int target = 2; target <= T + 1; ++target) {
    ScaledAccum acc;
    enumerate_paths(tp, target - 1, true, &acc, g);
    om.predicted_u[target - 2] = acc.mean_u();
    om.predicted_h[target - 2] = acc.mean_h();
  }
  return om;
}

McLoglik oracle_loglik_mc(const Dataset& d, const SvareParams& p, std::int64_t paths,
                          std::uint64_t seed) {
  d.validate();
  p.validate();
  if (paths < 100) throw std::invalid_argument("oracle_loglik_mc: need at least 100 paths");

  const auto stats = residual_stats(d, p);
  const int T = d.T();
  constexpr int kBatches = 100;
  const std::int64_t per_batch = paths / kBatches;

  Philox rng(seed, /*stream=*/4096);
  std::vector<double> batch_log(kBatches);
  for (int b = 0; b < kBatches; ++b) {
    double m = kNegInf, sum = 0.0;
    for (std::int64_t it = 0; it < per_batch; ++it) {
      double u = rng.next_normal(0.0, p.u_stationary_sd());
      double h = rng.next_normal(p.h_stationary_mean(), p.h_stationary_sd());
      double lp = 0.0;
      for (int t = 0; t < T; ++t) {
        if (t > 0) {
          u = p.rho * u + rng.next_normal(0.0, p.sigma_eta);
          h = p.alpha + p.delta * h + rng.next_normal(0.0, p.sigma_nu);
        }
        const GroupStats& s = stats[t];
        lp += -0.5 * s.n * (kLog2Pi + h) -
              0.5 * std::exp(-h) * (s.s2 - 2.0 * u * s.s1 + s.n * u * u);
      }
      if (lp > m) {
        sum = sum * std::exp(m - lp) + 1.0;
        m = lp;
      } else {
        sum += std::exp(lp - m);
      }
    }
    batch_log[b] = m + std::log(sum) - std::log(static_cast<double>(per_batch));
  }

  double mb = kNegInf;
  for (double v : batch_log) mb = std::max(mb, v);
  double tot = 0.0;
  for (double v : batch_log) tot += std::exp(v - mb);

  McLoglik out;
  out.loglik = mb + std::log(tot / kBatches);
  double ss = 0.0;
  for (double v : batch_log) {
    const double r = std::exp(v - out.loglik);  // batch mean relative to overall
    ss += (r - 1.0) * (r - 1.0);
  }
  out.se_rel = std::sqrt(ss / (kBatches - 1.0) / kBatches);
  return out;
}

}  // namespace svare
