// Python bindings for the core operations: data loading, the three model
// fits, the quadrature likelihood, simulation, diagnostics, and the index.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "svare/baseline.hpp"
#include "svare/dataset.hpp"
#include "svare/diagnostics.hpp"
#include "svare/estimate.hpp"
#include "svare/quadrature.hpp"
#include "svare/simulate.hpp"
#include "svare/svcore.hpp"

namespace py = pybind11;

namespace {

svare::CodingPlan plan_from_list(const py::object& coding) {
  svare::CodingPlan plan;
  if (coding.is_none()) return plan;
  for (const auto& item : coding.cast<py::list>()) {
    const py::dict spec = item.cast<py::dict>();
    svare::CodingVariable v;
    v.name = spec["name"].cast<std::string>();
    if (spec.contains("categories")) {
      v.categorical = true;
      v.categories = spec["categories"].cast<std::vector<std::string>>();
      v.baseline = spec.contains("baseline") ? spec["baseline"].cast<std::string>()
                                             : v.categories.front();
    }
    plan.variables.push_back(std::move(v));
  }
  return plan;
}

svare::SvareParams svare_params(const py::dict& d) {
  svare::SvareParams p;
  p.beta0 = d["beta0"].cast<double>();
  p.beta = d.contains("beta") ? d["beta"].cast<Eigen::VectorXd>() : Eigen::VectorXd(0);
  p.rho = d["rho"].cast<double>();
  p.sigma_eta = d["sigma_eta"].cast<double>();
  p.alpha = d["alpha"].cast<double>();
  p.delta = d["delta"].cast<double>();
  p.sigma_nu = d["sigma_nu"].cast<double>();
  p.validate();
  return p;
}

py::dict convergence_dict(const svare::Convergence& c) {
  py::dict out;
  out["iterations"] = c.iterations;
  out["grad_norm"] = c.grad_norm;
  out["status"] = c.status;
  out["converged"] = c.converged;
  return out;
}

py::dict states_dict(const svare::StateEstimates& st) {
  py::dict out;
  out["filtered_u"] = st.filtered_u;
  out["filtered_h"] = st.filtered_h;
  out["smoothed_u"] = st.smoothed_u;
  out["smoothed_h"] = st.smoothed_h;
  out["predicted_u"] = st.predicted_u;
  out["predicted_h"] = st.predicted_h;
  out["level2_eta"] = st.level2_eta;
  out["level2_nu"] = st.level2_nu;
  return out;
}

}  // namespace

PYBIND11_MODULE(_svare, m) {
  m.doc() = "Hedonic price models with AR(1) random time effects and stochastic volatility";

  py::class_<svare::Dataset>(m, "Dataset")
      .def(py::init([](const std::vector<std::string>& labels,
                       const std::vector<Eigen::VectorXd>& y,
                       const std::vector<Eigen::MatrixXd>& X,
                       const std::vector<std::string>& covariate_names) {
             svare::Dataset d;
             if (labels.size() != y.size() || labels.size() != X.size())
               throw std::invalid_argument("labels, y, X must have equal length");
             for (std::size_t t = 0; t < labels.size(); ++t)
               d.groups.push_back({labels[t], y[t], X[t]});
             d.covariate_names = covariate_names;
             d.validate();
             return d;
           }),
           py::arg("labels"), py::arg("y"), py::arg("X"),
           py::arg("covariate_names") = std::vector<std::string>{})
      .def_property_readonly("T", &svare::Dataset::T)
      .def_property_readonly("k", &svare::Dataset::k)
      .def_property_readonly("n_total", &svare::Dataset::n_total)
      .def_property_readonly("times", &svare::Dataset::times)
      .def_property_readonly("covariate_names",
                             [](const svare::Dataset& d) { return d.covariate_names; })
      .def("y", [](const svare::Dataset& d, int t) { return d.groups.at(t).y; })
      .def("X", [](const svare::Dataset& d, int t) { return d.groups.at(t).X; })
      .def("__repr__", [](const svare::Dataset& d) {
        return "Dataset(T=" + std::to_string(d.T()) + ", k=" + std::to_string(d.k()) +
               ", n_total=" + std::to_string(d.n_total()) + ")";
      });

  m.def(
      "load_csv",
      [](const std::string& path, const py::object& coding, const std::string& time_col,
         const std::string& response_col, bool log10) {
        return svare::load_csv(path, plan_from_list(coding), time_col, response_col, log10);
      },
      py::arg("path"), py::arg("coding") = py::none(), py::arg("time_col") = "time",
      py::arg("response_col") = "price", py::arg("log10") = true);

  m.def("fit_fe", [](const svare::Dataset& d) {
    const svare::FeFit fit = svare::fit_fe(d);
    py::dict out;
    out["beta0_t"] = fit.params.beta0_t;
    out["beta"] = fit.params.beta;
    out["sigma2"] = fit.params.sigma2;
    out["se_beta0_t"] = fit.se_beta0_t;
    out["se_beta"] = fit.se_beta;
    out["loglik"] = fit.loglik;
    out["aic"] = fit.aic;
    out["bic"] = fit.bic;
    out["n_params"] = fit.n_params;
    return out;
  });

  m.def(
      "fit_are",
      [](const svare::Dataset& d) {
        const svare::AreFit fit = svare::fit_are(d);
        py::dict out;
        out["beta0"] = fit.params.beta0;
        out["beta"] = fit.params.beta;
        out["rho"] = fit.params.rho;
        out["sigma2_eta"] = fit.params.sigma2_eta;
        out["sigma2"] = fit.params.sigma2;
        out["param_names"] = fit.param_names;
        out["se"] = fit.se;
        out["se_valid"] = fit.se_valid;
        out["loglik"] = fit.loglik;
        out["aic"] = fit.aic;
        out["bic"] = fit.bic;
        out["n_params"] = fit.n_params;
        out["convergence"] = convergence_dict(fit.convergence);
        out["filtered_u"] = fit.filter.filtered_u;
        out["smoothed_u"] = fit.filter.smoothed_u;
        return out;
      },
      py::arg("data"));

  m.def(
      "fit_svare",
      [](const svare::Dataset& d, int n_u, int n_h, double grid_mult, int max_iters) {
        svare::FitOptions opts;
        opts.n_u = n_u;
        opts.n_h = n_h;
        opts.grid_mult = grid_mult;
        opts.optim.max_iters = max_iters;
        const svare::SvareFit fit = svare::fit_svare(d, std::nullopt, opts);
        py::dict out;
        out["beta0"] = fit.params.beta0;
        out["beta"] = fit.params.beta;
        out["rho"] = fit.params.rho;
        out["sigma_eta"] = fit.params.sigma_eta;
        out["alpha"] = fit.params.alpha;
        out["delta"] = fit.params.delta;
        out["sigma_nu"] = fit.params.sigma_nu;
        out["param_names"] = fit.param_names;
        out["se"] = fit.se;
        out["se_valid"] = fit.se_valid;
        out["loglik"] = fit.loglik;
        out["aic"] = fit.aic;
        out["bic"] = fit.bic;
        out["n_params"] = fit.n_params;
        out["convergence"] = convergence_dict(fit.convergence);
        out["states"] = states_dict(fit.states);
        out["n_u"] = fit.n_u;
        out["n_h"] = fit.n_h;
        return out;
      },
      py::arg("data"), py::arg("n_u") = 0, py::arg("n_h") = 0, py::arg("grid_mult") = 3.0,
      py::arg("max_iters") = 500);

  m.def(
      "svare_loglik",
      [](const svare::Dataset& d, const py::dict& params, int n_u, int n_h, double grid_mult) {
        const svare::SvareParams p = svare_params(params);
        auto [du, dh] = svare::default_point_counts(p, grid_mult);
        if (n_u > 0) du = n_u;
        if (n_h > 0) dh = n_h;
        const svare::QuadGrid g = svare::build_grid(p, du, dh, grid_mult);
        return svare::forward_loglik(d, p, g);
      },
      py::arg("data"), py::arg("params"), py::arg("n_u") = 0, py::arg("n_h") = 0,
      py::arg("grid_mult") = 3.0);

  m.def(
      "svare_states",
      [](const svare::Dataset& d, const py::dict& params, int n_u, int n_h, double grid_mult) {
        const svare::SvareParams p = svare_params(params);
        auto [du, dh] = svare::default_point_counts(p, grid_mult);
        if (n_u > 0) du = n_u;
        if (n_h > 0) dh = n_h;
        svare::RecursionState st = svare::forward(d, p, svare::build_grid(p, du, dh, grid_mult));
        py::dict out = states_dict(svare::estimate_states(d, p, st));
        out["loglik"] = st.loglik();
        return out;
      },
      py::arg("data"), py::arg("params"), py::arg("n_u") = 0, py::arg("n_h") = 0,
      py::arg("grid_mult") = 3.0);

  m.def(
      "simulate_svare",
      [](const py::dict& params, int T, const std::vector<int>& group_sizes, int k,
         std::uint64_t seed) {
        svare::SimConfig cfg;
        cfg.model = svare::SimModel::SVARE;
        cfg.svare = svare_params(params);
        cfg.T = T;
        cfg.group_sizes = group_sizes;
        cfg.k = k;
        cfg.seed = seed;
        const svare::SimResult r = svare::simulate(cfg);
        py::dict out;
        out["data"] = r.data;
        out["u"] = r.u;
        out["h"] = r.h;
        return out;
      },
      py::arg("params"), py::arg("T"), py::arg("group_sizes"), py::arg("k") = 0,
      py::arg("seed") = 0);

  m.def(
      "gl_rule",
      [](int order) {
        const svare::GLRule r = svare::gl_rule(order);
        return py::make_tuple(r.nodes, r.weights);
      },
      py::arg("order"));

  m.def(
      "default_point_counts",
      [](const py::dict& params, double grid_mult) {
        const auto [nu, nh] = svare::default_point_counts(svare_params(params), grid_mult);
        return py::make_tuple(nu, nh);
      },
      py::arg("params"), py::arg("grid_mult") = 3.0);

  m.def(
      "moments",
      [](const Eigen::VectorXd& x) {
        const svare::Moments mo = svare::moments(x);
        return py::make_tuple(mo.b1, mo.b2);
      },
      py::arg("x"));

  m.def(
      "price_index",
      [](const std::vector<std::string>& labels, double beta0, const Eigen::VectorXd& u,
         const std::string& base, bool base10) {
        const svare::PriceIndex idx = svare::price_index(labels, beta0, u, base, base10);
        py::dict out;
        out["labels"] = idx.labels;
        out["index"] = idx.index;
        out["beta0_t"] = idx.beta0_t;
        return out;
      },
      py::arg("labels"), py::arg("beta0"), py::arg("smoothed_u"), py::arg("base"),
      py::arg("base10") = false);
}
