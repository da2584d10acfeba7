#include "svare/optim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace svare {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double step_size(double xi, double rel) { return rel * std::max(1.0, std::abs(xi)); }

}  // namespace

Eigen::VectorXd numerical_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                   double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step_size(x[i], rel_step);
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd numerical_hessian(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                  double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd xp = x;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = step_size(x[i], rel_step);
    xp[i] = x[i] + hi;
    const double fp = f(xp);
    xp[i] = x[i] - hi;
    const double fm = f(xp);
    xp[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double hj = step_size(x[j], rel_step);
      xp[i] = x[i] + hi;
      xp[j] = x[j] + hj;
      const double fpp = f(xp);
      xp[j] = x[j] - hj;
      const double fpm = f(xp);
      xp[i] = x[i] - hi;
      const double fmm = f(xp);
      xp[j] = x[j] + hj;
      const double fmp = f(xp);
      xp[i] = x[i];
      xp[j] = x[j];
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
    }
  }
  return H;
}

namespace {

// State shared by the line search: objective (minimized form) and gradient
// along the ray x + a*d.
struct Ray {
  const ObjectiveFn& fmin;  // minimized objective (-f)
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& d;
  double grad_step;
  int* n_evals;

  double phi(double a) const {
    ++*n_evals;
    const double v = fmin(x + a * d);
    return std::isfinite(v) ? v : kInf;
  }
  double dphi(double a, Eigen::VectorXd* g_out) const {
    const Eigen::VectorXd xa = x + a * d;
    Eigen::VectorXd g(xa.size());
    Eigen::VectorXd xp = xa;
    for (Eigen::Index i = 0; i < xa.size(); ++i) {
      const double h = step_size(xa[i], grad_step);
      xp[i] = xa[i] + h;
      const double fp = fmin(xp);
      xp[i] = xa[i] - h;
      const double fm = fmin(xp);
      xp[i] = xa[i];
      g[i] = (fp - fm) / (2.0 * h);
      *n_evals += 2;
    }
    if (g_out) *g_out = g;
    return g.dot(d);
  }
};

struct LineResult {
  double alpha = 0.0;
  double f = kInf;
  Eigen::VectorXd grad;  // gradient of minimized objective at accepted point
  bool ok = false;
};

constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;

// Nocedal & Wright zoom: interval [lo, hi] with phi(lo) the best value so far.
LineResult zoom(const Ray& ray, double alo, double flo, double dlo, double ahi, double fhi,
                double f0, double d0) {
  LineResult res;
  for (int it = 0; it < 30; ++it) {
    // Quadratic interpolation using phi(alo), phi'(alo), phi(ahi); fall back
    // to bisection when the fit is degenerate or outside the bracket.
    double a = alo - 0.5 * dlo * (ahi - alo) * (ahi - alo) /
                         (fhi - flo - dlo * (ahi - alo));
    const double lo = std::min(alo, ahi), hi = std::max(alo, ahi);
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(a) || a < lo + margin || a > hi - margin) a = 0.5 * (alo + ahi);

    const double fa = ray.phi(a);
    if (fa > f0 + kC1 * a * d0 || fa >= flo) {
      ahi = a;
      fhi = fa;
    } else {
      Eigen::VectorXd g;
      const double da = ray.dphi(a, &g);
      if (std::abs(da) <= -kC2 * d0) {
        res.alpha = a;
        res.f = fa;
        res.grad = std::move(g);
        res.ok = true;
        return res;
      }
      if (da * (ahi - alo) >= 0.0) {
        ahi = alo;
        fhi = flo;
      }
      alo = a;
      flo = fa;
      dlo = da;
    }
    if (std::abs(ahi - alo) < 1e-14 * std::max(1.0, std::abs(alo))) break;
  }
  // Accept the best point found even without the curvature condition, as long
  // as it decreases the objective; BFGS guards the update separately.
  if (flo < f0) {
    res.alpha = alo;
    res.f = flo;
    ray.dphi(alo, &res.grad);
    res.ok = true;
  }
  return res;
}

LineResult wolfe_search(const Ray& ray, double f0, double d0) {
  LineResult res;
  double a_prev = 0.0, f_prev = f0;
  double a = 1.0;
  for (int it = 0; it < 20; ++it) {
    const double fa = ray.phi(a);
    if (fa > f0 + kC1 * a * d0 || (it > 0 && fa >= f_prev)) {
      return zoom(ray, a_prev, f_prev, it == 0 ? d0 : ray.dphi(a_prev, nullptr), a, fa, f0, d0);
    }
    Eigen::VectorXd g;
    const double da = ray.dphi(a, &g);
    if (std::abs(da) <= -kC2 * d0) {
      res.alpha = a;
      res.f = fa;
      res.grad = std::move(g);
      res.ok = true;
      return res;
    }
    if (da >= 0.0) return zoom(ray, a, fa, da, a_prev, f_prev, f0, d0);
    a_prev = a;
    f_prev = fa;
    a *= 2.0;
  }
  return res;
}

}  // namespace

OptimResult maximize(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
  OptimResult out;
  int n_evals = 0;
  const ObjectiveFn fmin = [&](const Eigen::VectorXd& x) { return -f(x); };

  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = x0;
  ++n_evals;
  double fx = fmin(x);
  if (!std::isfinite(fx)) {
    out.x = x;
    out.f = -fx;
    out.message = "objective not finite at the starting point";
    return out;
  }
  Eigen::VectorXd g = numerical_gradient(fmin, x, opts.grad_step);
  n_evals += 2 * static_cast<int>(n);

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  out.message = "maximum iterations reached";
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    out.iterations = iter + 1;
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      out.converged = true;
      out.message = "gradient norm below tolerance";
      out.iterations = iter;
      break;
    }

    Eigen::VectorXd d = -(Hinv * g);
    double d0 = g.dot(d);
    if (!(d0 < 0.0)) {  // not a descent direction; reset to steepest descent
      Hinv.setIdentity();
      d = -g;
      d0 = g.dot(d);
    }

    const Ray ray{fmin, x, d, opts.grad_step, &n_evals};
    const LineResult ls = wolfe_search(ray, fx, d0);
    if (!ls.ok) {
      out.message = "line search failed to make progress";
      break;
    }

    const Eigen::VectorXd s = ls.alpha * d;
    const Eigen::VectorXd y = ls.grad - g;
    const double f_prev = fx;
    x += s;
    fx = ls.f;
    g = ls.grad;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {  // curvature guard keeps Hinv PD
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }

    if (opts.verbose)
      std::printf("iter %3d  f = %.10g  |g| = %.3g  step = %.3g\n", iter + 1, -fx,
                  g.lpNorm<Eigen::Infinity>(), ls.alpha);

    const double denom = std::max({std::abs(fx), std::abs(f_prev), 1.0});
    if (std::abs(fx - f_prev) / denom < opts.f_rel_tol) {
      out.converged = true;
      out.message = "objective change below tolerance";
      break;
    }
  }

  out.x = x;
  out.f = -fx;
  out.gradient = -g;
  out.n_evals = n_evals;
  return out;
}

}  // namespace svare
