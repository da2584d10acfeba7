#include "svare/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace svare {

namespace {

// Legendre P_n and its derivative at x, by the three-term recurrence.
std::pair<double, double> legendre_pd(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

GLRule gl_rule(int order) {
  if (order < 1 || order > 512)
    throw std::invalid_argument("gl_rule: order must be in [1, 512], got " + std::to_string(order));

  GLRule rule;
  rule.order = order;
  rule.nodes = Eigen::VectorXd::Zero(order);
  rule.weights = Eigen::VectorXd::Zero(order);

  if (order == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }

  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-type starting point for the i-th root (descending order).
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, d] = legendre_pd(order, x);
      dp = d;
      const double step = p / d;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const auto [p, d] = legendre_pd(order, x);
    dp = d;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Roots come out descending in x for increasing i; store ascending and
    // mirror so the rule is symmetric to the bit.
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

GridAxis map_axis(const GLRule& rule, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("map_axis: requires lo < hi");
  GridAxis axis;
  axis.lo = lo;
  axis.hi = hi;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  axis.points = (rule.nodes.array() * half + mid).matrix();
  axis.weights = rule.weights;
  return axis;
}

QuadGrid build_grid(const SvareParams& p, int n_u, int n_h, double mult) {
  p.validate();
  if (n_u < 3 || n_h < 3 || n_u % 2 == 0 || n_h % 2 == 0)
    throw std::invalid_argument("build_grid: point counts must be odd and >= 3");
  if (!(mult > 0.0)) throw std::invalid_argument("build_grid: mult must be > 0");

  const double su = p.u_stationary_sd();
  const double mh = p.h_stationary_mean();
  const double sh = p.h_stationary_sd();

  QuadGrid grid;
  grid.u = map_axis(gl_rule(n_u), -mult * su, mult * su);
  grid.h = map_axis(gl_rule(n_h), mh - mult * sh, mh + mult * sh);
  return grid;
}

std::pair<int, int> default_point_counts(const SvareParams& p, double mult) {
  p.validate();
  const auto count_for = [mult](double stationary_sd, double innovation_sd) {
    const double width = 2.0 * mult * stationary_sd;
    const double max_spacing = innovation_sd / 2.0;
    // Smallest n with width / (n - 1) <= max_spacing.
    int n = static_cast<int>(std::ceil(width / max_spacing)) + 1;
    if (static_cast<double>(n - 1) * max_spacing < width) ++n;  // ceil guard
    if (n % 2 == 0) ++n;
    if (n < 3) n = 3;
    if (n > kMaxPointsPerAxis) n = kMaxPointsPerAxis;
    return n;
  };
  return {count_for(p.u_stationary_sd(), p.sigma_eta),
          count_for(p.h_stationary_sd(), p.sigma_nu)};
}

}  // namespace svare
