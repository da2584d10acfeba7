#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace svare {

// Scalar objective of a parameter vector. Non-finite returns are treated as
// "infeasible" by the optimizer (the step is rejected, never accepted).
using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
  int max_iters = 500;
  double grad_tol = 1e-5;    // infinity norm of the gradient
  double f_rel_tol = 1e-9;   // relative change of the objective
  double grad_step = 1e-5;   // relative central-difference step for gradients
  bool verbose = false;
};

struct OptimResult {
  Eigen::VectorXd x;         // maximizer
  double f = 0.0;            // maximized value
  Eigen::VectorXd gradient;  // gradient of f at x
  int iterations = 0;
  int n_evals = 0;           // objective evaluations, including differencing
  bool converged = false;
  std::string message;
};

// Compact convergence summary carried by fit results.
struct Convergence {
  int iterations = 0;
  double grad_norm = 0.0;
  std::string status;  // "gradient", "f-change", "max-iter", or a failure note
  bool converged = false;
};

inline Convergence summarize(const OptimResult& r) {
  Convergence c;
  c.iterations = r.iterations;
  c.grad_norm = r.gradient.size() ? r.gradient.lpNorm<Eigen::Infinity>() : 0.0;
  if (r.message.find("gradient") != std::string::npos) c.status = "gradient";
  else if (r.message.find("objective change") != std::string::npos) c.status = "f-change";
  else if (r.message.find("maximum iterations") != std::string::npos) c.status = "max-iter";
  else c.status = r.message;
  c.converged = r.converged;
  return c;
}

// Central-difference gradient with per-coordinate step rel_step * max(1, |x_i|).
Eigen::VectorXd numerical_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                   double rel_step = 1e-5);

// Central-difference Hessian (symmetric by construction).
Eigen::MatrixXd numerical_hessian(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                  double rel_step = 1e-4);

// BFGS with a Wolfe line search, run on -f so callers can think in terms of
// maximization. Converged when the gradient infinity norm drops below
// grad_tol or the relative objective change drops below f_rel_tol.
OptimResult maximize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                     const OptimOptions& opts = {});

}  // namespace svare
