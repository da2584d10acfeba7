#include "svare/diagnostics.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "svare/rng.hpp"

namespace svare {

Moments moments(const Eigen::VectorXd& x) {
  const double n = static_cast<double>(x.size());
  if (n < 4) throw std::invalid_argument("moments: need at least 4 observations");
  const double mean = x.mean();
  const Eigen::ArrayXd c = x.array() - mean;
  const double m2 = c.square().mean();
  if (!(m2 > 0.0)) throw std::invalid_argument("moments: zero variance");
  const double g1 = c.cube().mean() / std::pow(m2, 1.5);
  const double g2 = c.square().square().mean() / (m2 * m2) - 3.0;

  const double f = (n - 1.0) / n;
  Moments out;
  out.b1 = g1 * std::pow(f, 1.5);
  out.b2 = (g2 + 3.0) * f * f - 3.0;
  return out;
}

Eigen::VectorXd per_period_sd(const std::vector<Eigen::VectorXd>& grouped) {
  Eigen::VectorXd sd(grouped.size());
  for (std::size_t t = 0; t < grouped.size(); ++t) {
    const auto& g = grouped[t];
    if (g.size() < 2) throw std::invalid_argument("per_period_sd: group with fewer than 2 rows");
    sd[t] = std::sqrt((g.array() - g.mean()).square().sum() / (g.size() - 1.0));
  }
  return sd;
}

SerialCorr acf_pacf(const Eigen::VectorXd& x, int L) {
  const int T = static_cast<int>(x.size());
  if (L < 1 || T <= L) throw std::invalid_argument("acf_pacf: need length > L >= 1");
  const double mean = x.mean();
  const Eigen::VectorXd c = x.array() - mean;
  const double denom = c.squaredNorm();
  if (!(denom > 0.0)) throw std::invalid_argument("acf_pacf: constant series");

  SerialCorr out;
  out.acf.resize(L + 1);
  out.acf[0] = 1.0;
  for (int k = 1; k <= L; ++k)
    out.acf[k] = c.head(T - k).dot(c.tail(T - k)) / denom;
  out.band = 1.96 / std::sqrt(static_cast<double>(T));

  // Durbin-Levinson.
  out.pacf.resize(L);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(L);
  double v = 1.0;
  for (int k = 1; k <= L; ++k) {
    double num = out.acf[k];
    for (int j = 1; j < k; ++j) num -= prev[j - 1] * out.acf[k - j];
    const double a = num / v;
    phi[k - 1] = a;
    for (int j = 1; j < k; ++j) phi[j - 1] = prev[j - 1] - a * prev[k - j - 1];
    v *= (1.0 - a * a);
    out.pacf[k - 1] = a;
    prev.head(k) = phi.head(k);
  }
  return out;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double silverman_bw(const Eigen::VectorXd& x) {
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt((x.array() - x.mean()).square().sum() / (n - 1.0));
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) throw std::invalid_argument("entropy_sk: degenerate series");
  return 0.9 * spread * std::pow(n, -0.2);
}

constexpr int kGridPts = 101;

// Kernel evaluation matrix: K(r, i) = phi((grid_r - x_i)/bw)/bw.
Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& grid, const Eigen::VectorXd& x, double bw) {
  const double norm = 1.0 / (bw * std::sqrt(2.0 * std::numbers::pi));
  Eigen::MatrixXd K(grid.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    K.col(i) = (-0.5 * ((grid.array() - x[i]) / bw).square()).exp() * norm;
  return K;
}

Eigen::VectorXd trapezoid_weights(double step) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(kGridPts, step);
  w[0] *= 0.5;
  w[kGridPts - 1] *= 0.5;
  return w;
}

// S_k for the aligned pair samples (a_i, b_i).
double entropy_pair(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double n = static_cast<double>(a.size());
  const double bw1 = silverman_bw(a), bw2 = silverman_bw(b);

  const auto make_grid = [](const Eigen::VectorXd& x, double bw) {
    const double lo = x.minCoeff() - 3.0 * bw, hi = x.maxCoeff() + 3.0 * bw;
    return Eigen::VectorXd::LinSpaced(kGridPts, lo, hi).eval();
  };
  const Eigen::VectorXd g1 = make_grid(a, bw1), g2 = make_grid(b, bw2);
  const Eigen::MatrixXd K1 = kernel_matrix(g1, a, bw1);
  const Eigen::MatrixXd K2 = kernel_matrix(g2, b, bw2);

  const Eigen::VectorXd f1 = K1.rowwise().mean();
  const Eigen::VectorXd f2 = K2.rowwise().mean();
  const Eigen::MatrixXd f12 = (K1 * K2.transpose()) / n;

  const Eigen::VectorXd w1 = trapezoid_weights((g1[kGridPts - 1] - g1[0]) / (kGridPts - 1));
  const Eigen::VectorXd w2 = trapezoid_weights((g2[kGridPts - 1] - g2[0]) / (kGridPts - 1));

  const Eigen::MatrixXd diff =
      f12.cwiseSqrt() - (f1 * f2.transpose()).cwiseSqrt();
  return 0.5 * w1.dot(diff.cwiseProduct(diff) * w2);
}

Eigen::VectorXd entropy_all_lags(const Eigen::VectorXd& x, int L) {
  const int T = static_cast<int>(x.size());
  Eigen::VectorXd s(L);
  for (int k = 1; k <= L; ++k)
    s[k - 1] = entropy_pair(x.head(T - k), x.tail(T - k));
  return s;
}

}  // namespace

EntropySeries entropy_sk(const Eigen::VectorXd& x, int L, int B, std::uint64_t seed) {
  const int T = static_cast<int>(x.size());
  if (L < 1 || T <= L + 10) throw std::invalid_argument("entropy_sk: need length > L + 10");
  if (B < 99) throw std::invalid_argument("entropy_sk: need at least 99 permutations");

  EntropySeries out;
  out.s = entropy_all_lags(x, L);

  // Null distribution: S at every lag over B permutations of the series.
  Eigen::MatrixXd null_s(B, L);
  for (int rep = 0; rep < B; ++rep) {
    Philox rng(seed, 8192 + static_cast<std::uint64_t>(rep));
    std::vector<double> shuffled(x.data(), x.data() + T);
    for (int i = T - 1; i > 0; --i)
      std::swap(shuffled[i], shuffled[rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
    const Eigen::Map<const Eigen::VectorXd> xs(shuffled.data(), T);
    null_s.row(rep) = entropy_all_lags(xs, L).transpose();
  }

  // k-th order statistic with k = ceil(q*(B+1)) gives an exact-level band.
  const auto order_stat = [&](int lag, double q) {
    std::vector<double> col(null_s.col(lag).data(), null_s.col(lag).data() + B);
    std::sort(col.begin(), col.end());
    const int k = std::min(B, static_cast<int>(std::ceil(q * (B + 1))));
    return col[k - 1];
  };
  out.band90.resize(L);
  out.band95.resize(L);
  for (int lag = 0; lag < L; ++lag) {
    out.band90[lag] = order_stat(lag, 0.90);
    out.band95[lag] = order_stat(lag, 0.95);
  }
  return out;
}

LeveneResult rank_levene(const std::vector<Eigen::VectorXd>& grouped) {
  const int T = static_cast<int>(grouped.size());
  if (T < 2) throw std::invalid_argument("rank_levene: need at least 2 groups");

  // Absolute deviations from the per-period medians.
  std::vector<std::vector<double>> dev(T);
  std::size_t N = 0;
  for (int t = 0; t < T; ++t) {
    const auto& g = grouped[t];
    if (g.size() < 2) throw std::invalid_argument("rank_levene: group with fewer than 2 rows");
    std::vector<double> v(g.data(), g.data() + g.size());
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    double med = v[v.size() / 2];
    if (v.size() % 2 == 0) {
      const double lower = *std::max_element(v.begin(), v.begin() + v.size() / 2);
      med = 0.5 * (med + lower);
    }
    dev[t].resize(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) dev[t][i] = std::abs(g[i] - med);
    N += g.size();
  }

  // Midranks over the pooled deviations, with tie bookkeeping.
  struct Entry {
    double value;
    int group;
  };
  std::vector<Entry> pooled;
  pooled.reserve(N);
  for (int t = 0; t < T; ++t)
    for (double v : dev[t]) pooled.push_back({v, t});
  std::sort(pooled.begin(), pooled.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });

  std::vector<double> rank_sum(T, 0.0);
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < N) {
    std::size_t j = i;
    while (j < N && pooled[j].value == pooled[i].value) ++j;
    const double midrank = 0.5 * (i + 1 + j);  // average of ranks i+1..j
    const double c = static_cast<double>(j - i);
    tie_term += c * c * c - c;
    for (std::size_t r = i; r < j; ++r) rank_sum[pooled[r].group] += midrank;
    i = j;
  }

  const double n = static_cast<double>(N);
  double H = 0.0;
  for (int t = 0; t < T; ++t) {
    const double nt = static_cast<double>(grouped[t].size());
    H += rank_sum[t] * rank_sum[t] / nt;
  }
  H = 12.0 / (n * (n + 1.0)) * H - 3.0 * (n + 1.0);
  const double correction = 1.0 - tie_term / (n * n * n - n);

  LeveneResult out;
  if (!(correction > 0.0)) return out;  // every deviation tied: statistic 0, p 1
  H /= correction;
  out.statistic = std::max(H, 0.0);
  const boost::math::chi_squared chi2(T - 1.0);
  out.p_value = boost::math::cdf(boost::math::complement(chi2, out.statistic));
  return out;
}

PredMetrics prediction_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() == 0)
    throw std::invalid_argument("prediction_metrics: length mismatch or empty input");
  const Eigen::ArrayXd e = (y_true - y_pred).array();
  return {e.abs().mean(), std::sqrt(e.square().mean())};
}

PriceIndex price_index(const std::vector<std::string>& labels, double beta0,
                       const Eigen::VectorXd& smoothed_u, const std::string& base,
                       bool base10) {
  if (static_cast<Eigen::Index>(labels.size()) != smoothed_u.size())
    throw std::invalid_argument("price_index: labels and states differ in length");
  const auto it = std::find(labels.begin(), labels.end(), base);
  if (it == labels.end())
    throw std::invalid_argument("price_index: unknown base label '" + base + "'");
  const Eigen::Index b = it - labels.begin();

  PriceIndex out;
  out.base = base;
  out.labels = labels;
  out.beta0_t = smoothed_u.array() + beta0;
  Eigen::ArrayXd diff = smoothed_u.array() - smoothed_u[b];
  if (base10) diff *= std::numbers::ln10;
  out.index = diff.exp() * 100.0;
  out.index[b] = 100.0;  // exact at the base, immune to rounding
  return out;
}

}  // namespace svare
