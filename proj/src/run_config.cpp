#include "svare/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace svare {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("config: " + msg);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) fail("unknown key '" + key + "' in " + where);
}

Eigen::VectorXd as_vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

CodingPlan parse_coding(const json& j) {
  check_keys(j, "[coding]", {"variables"});
  CodingPlan plan;
  if (!j.contains("variables")) return plan;
  for (const auto& v : j.at("variables")) {
    check_keys(v, "[coding].variables", {"name", "type", "categories", "baseline"});
    CodingVariable var;
    var.name = v.at("name").get<std::string>();
    const std::string type = v.value("type", "numeric");
    if (type == "numeric") {
      var.categorical = false;
    } else if (type == "categorical") {
      var.categorical = true;
      if (!v.contains("categories")) fail("categorical variable '" + var.name + "' needs categories");
      for (const auto& c : v.at("categories")) var.categories.push_back(c.get<std::string>());
      if (var.categories.empty()) fail("variable '" + var.name + "' has no categories");
      var.baseline = v.value("baseline", var.categories.front());
      if (std::find(var.categories.begin(), var.categories.end(), var.baseline) ==
          var.categories.end())
        fail("baseline '" + var.baseline + "' not among categories of '" + var.name + "'");
    } else {
      fail("variable '" + var.name + "' has unknown type '" + type + "'");
    }
    plan.variables.push_back(std::move(var));
  }
  return plan;
}

SimConfig parse_sim(const json& j) {
  check_keys(j, "[simulate]", {"model", "T", "group_sizes", "k", "seed", "params"});
  SimConfig sim;
  const std::string model = j.value("model", "svare");
  if (model == "fe") sim.model = SimModel::FE;
  else if (model == "are") sim.model = SimModel::ARE;
  else if (model == "svare") sim.model = SimModel::SVARE;
  else fail("[simulate].model must be fe, are, or svare");

  sim.T = j.value("T", 10);
  sim.k = j.value("k", 0);
  sim.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("group_sizes")) {
    const auto& gs = j.at("group_sizes");
    if (gs.is_number_integer()) sim.group_sizes = {gs.get<int>()};
    else
      for (const auto& g : gs) sim.group_sizes.push_back(g.get<int>());
  }

  if (!j.contains("params")) fail("[simulate] needs a params object");
  const json& p = j.at("params");
  switch (sim.model) {
    case SimModel::FE:
      check_keys(p, "[simulate].params", {"beta0_t", "beta", "sigma2"});
      sim.fe.beta0_t = as_vector(p.at("beta0_t"), "beta0_t");
      sim.fe.beta = p.contains("beta") ? as_vector(p.at("beta"), "beta") : Eigen::VectorXd(0);
      sim.fe.sigma2 = p.value("sigma2", 1.0);
      break;
    case SimModel::ARE:
      check_keys(p, "[simulate].params", {"beta0", "beta", "rho", "sigma2_eta", "sigma2"});
      sim.are.beta0 = p.value("beta0", 0.0);
      sim.are.beta = p.contains("beta") ? as_vector(p.at("beta"), "beta") : Eigen::VectorXd(0);
      sim.are.rho = p.value("rho", 0.0);
      sim.are.sigma2_eta = p.value("sigma2_eta", 0.0);
      sim.are.sigma2 = p.value("sigma2", 1.0);
      break;
    case SimModel::SVARE:
      check_keys(p, "[simulate].params",
                 {"beta0", "beta", "rho", "sigma_eta", "alpha", "delta", "sigma_nu"});
      sim.svare.beta0 = p.value("beta0", 0.0);
      sim.svare.beta = p.contains("beta") ? as_vector(p.at("beta"), "beta") : Eigen::VectorXd(0);
      sim.svare.rho = p.value("rho", 0.0);
      sim.svare.sigma_eta = p.value("sigma_eta", 0.1);
      sim.svare.alpha = p.value("alpha", 0.0);
      sim.svare.delta = p.value("delta", 0.0);
      sim.svare.sigma_nu = p.value("sigma_nu", 0.1);
      break;
  }
  return sim;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    fail("'" + path + "' is not valid JSON: " + e.what());
  }

  check_keys(root, "top level",
             {"data", "coding", "fit", "diagnose", "simulate", "out", "seed", "threads",
              "holdout"});

  RunConfig cfg;
  if (root.contains("data")) {
    const json& d = root.at("data");
    check_keys(d, "[data]", {"path", "time_col", "response_col", "log10"});
    cfg.data_path = d.value("path", "");
    cfg.time_col = d.value("time_col", cfg.time_col);
    cfg.response_col = d.value("response_col", cfg.response_col);
    cfg.log10_transform = d.value("log10", cfg.log10_transform);
  }
  if (root.contains("coding")) cfg.coding = parse_coding(root.at("coding"));
  if (root.contains("fit")) {
    const json& f = root.at("fit");
    check_keys(f, "[fit]",
               {"model", "n_u", "n_h", "grid_mult", "ma_window", "max_iters", "grad_tol",
                "f_rel_tol"});
    cfg.model = f.value("model", cfg.model);
    cfg.n_u = f.value("n_u", cfg.n_u);
    cfg.n_h = f.value("n_h", cfg.n_h);
    cfg.grid_mult = f.value("grid_mult", cfg.grid_mult);
    cfg.ma_window = f.value("ma_window", cfg.ma_window);
    cfg.max_iters = f.value("max_iters", cfg.max_iters);
    cfg.grad_tol = f.value("grad_tol", cfg.grad_tol);
    cfg.f_rel_tol = f.value("f_rel_tol", cfg.f_rel_tol);
  }
  if (root.contains("diagnose")) {
    const json& g = root.at("diagnose");
    check_keys(g, "[diagnose]", {"lags", "permutations", "index_base", "index_base10"});
    cfg.lags = g.value("lags", cfg.lags);
    cfg.permutations = g.value("permutations", cfg.permutations);
    cfg.index_base = g.value("index_base", cfg.index_base);
    cfg.index_base10 = g.value("index_base10", cfg.index_base10);
  }
  if (root.contains("simulate")) {
    cfg.sim = parse_sim(root.at("simulate"));
    cfg.has_sim = true;
  }
  cfg.out_dir = root.value("out", cfg.out_dir);
  if (root.contains("seed")) {
    cfg.seed = root.at("seed").get<std::uint64_t>();
    cfg.seed_set = true;
  }
  cfg.threads = root.value("threads", cfg.threads);
  cfg.holdout = root.value("holdout", cfg.holdout);

  if (cfg.model != "fe" && cfg.model != "are" && cfg.model != "svare")
    fail("[fit].model must be fe, are, or svare");
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json root;
  root["data"] = {{"path", cfg.data_path},
                  {"time_col", cfg.time_col},
                  {"response_col", cfg.response_col},
                  {"log10", cfg.log10_transform}};

  json vars = json::array();
  for (const auto& v : cfg.coding.variables) {
    json jv{{"name", v.name}, {"type", v.categorical ? "categorical" : "numeric"}};
    if (v.categorical) {
      jv["categories"] = v.categories;
      jv["baseline"] = v.baseline;
    }
    vars.push_back(std::move(jv));
  }
  root["coding"] = {{"variables", std::move(vars)}};

  root["fit"] = {{"model", cfg.model},         {"n_u", cfg.n_u},
                 {"n_h", cfg.n_h},             {"grid_mult", cfg.grid_mult},
                 {"ma_window", cfg.ma_window}, {"max_iters", cfg.max_iters},
                 {"grad_tol", cfg.grad_tol},   {"f_rel_tol", cfg.f_rel_tol}};
  root["diagnose"] = {{"lags", cfg.lags},
                      {"permutations", cfg.permutations},
                      {"index_base", cfg.index_base},
                      {"index_base10", cfg.index_base10}};

  if (cfg.has_sim) {
    json sim;
    sim["T"] = cfg.sim.T;
    sim["k"] = cfg.sim.k;
    sim["seed"] = cfg.sim.seed;
    sim["group_sizes"] = cfg.sim.group_sizes;
    switch (cfg.sim.model) {
      case SimModel::FE:
        sim["model"] = "fe";
        sim["params"] = {{"beta0_t", vector_to_json(cfg.sim.fe.beta0_t)},
                         {"beta", vector_to_json(cfg.sim.fe.beta)},
                         {"sigma2", cfg.sim.fe.sigma2}};
        break;
      case SimModel::ARE:
        sim["model"] = "are";
        sim["params"] = {{"beta0", cfg.sim.are.beta0},
                         {"beta", vector_to_json(cfg.sim.are.beta)},
                         {"rho", cfg.sim.are.rho},
                         {"sigma2_eta", cfg.sim.are.sigma2_eta},
                         {"sigma2", cfg.sim.are.sigma2}};
        break;
      case SimModel::SVARE:
        sim["model"] = "svare";
        sim["params"] = {{"beta0", cfg.sim.svare.beta0},
                         {"beta", vector_to_json(cfg.sim.svare.beta)},
                         {"rho", cfg.sim.svare.rho},
                         {"sigma_eta", cfg.sim.svare.sigma_eta},
                         {"alpha", cfg.sim.svare.alpha},
                         {"delta", cfg.sim.svare.delta},
                         {"sigma_nu", cfg.sim.svare.sigma_nu}};
        break;
    }
    root["simulate"] = std::move(sim);
  }

  root["out"] = cfg.out_dir;
  if (cfg.seed_set) root["seed"] = cfg.seed;
  root["threads"] = cfg.threads;
  if (!cfg.holdout.empty()) root["holdout"] = cfg.holdout;
  return root.dump(2) + "\n";
}

}  // namespace svare
