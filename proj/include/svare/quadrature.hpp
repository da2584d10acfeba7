#pragma once

#include <Eigen/Core>
#include <utility>

#include "svare/model_params.hpp"

namespace svare {

// Gauss-Legendre rule on [-1, 1]: nodes ascending, weights positive and
// summing to 2. Exact for polynomials up to degree 2*order - 1.
struct GLRule {
  int order = 0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GLRule gl_rule(int order);

// One latent-process axis: Gauss-Legendre nodes mapped affinely onto
// [lo, hi]. Weights stay on the [-1, 1] measure; the half-width factor is
// applied once per recursion step as the jacobian.
struct GridAxis {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
  double lo = 0.0;
  double hi = 0.0;

  double half_width() const { return 0.5 * (hi - lo); }
  int n() const { return static_cast<int>(points.size()); }
};

struct QuadGrid {
  GridAxis u;
  GridAxis h;

  double jacobian() const { return u.half_width() * h.half_width(); }
  int nu() const { return u.n(); }
  int nh() const { return h.n(); }
};

GridAxis map_axis(const GLRule& rule, double lo, double hi);

// Grids centered on the stationary means of the two processes with
// half-width `mult` stationary SDs (3 by default). Point counts must be
// odd and >= 3 so a node sits on each process mean.
QuadGrid build_grid(const SvareParams& p, int n_u, int n_h, double mult = 3.0);

// Smallest odd point counts such that the average node spacing on each
// axis is at most half the innovation SD of that process. Floored at 3,
// capped at 201 (the forward pass is O(T n_u n_h (n_u + n_h))).
std::pair<int, int> default_point_counts(const SvareParams& p, double mult = 3.0);

inline constexpr int kMaxPointsPerAxis = 201;

}  // namespace svare
