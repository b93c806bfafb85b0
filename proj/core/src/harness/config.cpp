#include "newtonmr/harness/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace newtonmr::harness {

using nlohmann::json;

std::string_view to_string(ProfileMetric m) {
  switch (m) {
    case ProfileMetric::grad_norm: return "grad_norm";
    case ProfileMetric::objective: return "objective";
    case ProfileMetric::estimation_error: return "estimation_error";
  }
  return "unknown";
}

std::string_view to_string(PerformanceMode m) {
  return m == PerformanceMode::cost_to_target ? "cost_to_target" : "final_value";
}

PerformanceMode performance_mode_from_string(std::string_view s) {
  if (s == "cost_to_target") return PerformanceMode::cost_to_target;
  if (s == "final_value") return PerformanceMode::final_value;
  throw ConfigError("unknown performance mode '" + std::string(s) + "'");
}

void RunConfig::sync_termination() {
  for (OuterOptions* o : {static_cast<OuterOptions*>(&newton_mr), static_cast<OuterOptions*>(&baseline)}) {
    o->epsilon_g = epsilon_g;
    o->max_outer_iters = max_outer_iters;
  }
  baseline.stall_window = newton_mr.stall_window;
  baseline.krylov.max_iters = newton_mr.krylov.max_iters;
  baseline.krylov.rel_residual_tol = newton_mr.krylov.rel_residual_tol;
}

namespace {

void validate_solver_configs(const RunConfig& cfg) {
  try {
    cfg.newton_mr.validate();
    cfg.baseline.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  const auto& names = kProblemNames;
  if (std::find(std::begin(names), std::end(names), problem.name) == std::end(names))
    throw ConfigError("unknown problem '" + problem.name + "'");
  if (problem.n < 1 || problem.p < 1) throw ConfigError("problem sizes n and p must be positive");
  if (problem.name == "softmax" && problem.data_path.empty() && problem.num_classes < 2)
    throw ConfigError("softmax needs at least two classes");
  for (const std::string* path : {&problem.data_path, &problem.test_path}) {
    if (!path->empty() && !std::filesystem::exists(*path)) throw ConfigError("file not found: " + *path);
  }
  if (!problem.test_path.empty() && problem.data_path.empty())
    throw ConfigError("test_data requires data");
  if (profile.runs < 1) throw ConfigError("profile.runs must be >= 1");
  if (profile.threads < 1) throw ConfigError("profile.threads must be >= 1");
  if (profile.solvers.empty()) throw ConfigError("profile.solvers must not be empty");
  if (!(profile.grad_target > 0.0) || !(profile.f_rel_tol > 0.0) || !(profile.error_rel_tol >= 0.0))
    throw ConfigError("profile targets must be positive");
  if (profile.n_lambdas < 2) throw ConfigError("profile.n_lambdas must be >= 2");
  RunConfig copy = *this;
  copy.sync_termination();
  validate_solver_configs(copy);
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for " + where + "." + key);
  }
}

SolverKind parse_solver(const std::string& s) {
  try {
    return solver_kind_from_string(s);
  } catch (const std::invalid_argument&) {
    throw ConfigError("unknown solver '" + s + "'");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  reject_unknown(root, {"problem", "solver", "newton_mr", "baseline", "krylov", "termination", "output", "profile"},
                 "config");

  if (root.contains("problem")) {
    const json& p = root["problem"];
    reject_unknown(p, {"name", "data", "test_data", "n", "p", "classes", "seed"}, "problem");
    read(p, "name", cfg.problem.name, "problem");
    read(p, "data", cfg.problem.data_path, "problem");
    read(p, "test_data", cfg.problem.test_path, "problem");
    read(p, "n", cfg.problem.n, "problem");
    read(p, "p", cfg.problem.p, "problem");
    read(p, "classes", cfg.problem.num_classes, "problem");
    read(p, "seed", cfg.problem.seed, "problem");
  }
  if (root.contains("solver")) {
    std::string s;
    read(root, "solver", s, "config");
    cfg.solver = parse_solver(s);
  }
  if (root.contains("newton_mr")) {
    const json& n = root["newton_mr"];
    reject_unknown(n, {"rho", "theta", "mode", "inner_stop", "max_linesearch", "reorthogonalize"}, "newton_mr");
    read(n, "rho", cfg.newton_mr.rho, "newton_mr");
    read(n, "theta", cfg.newton_mr.theta, "newton_mr");
    read(n, "max_linesearch", cfg.newton_mr.max_linesearch, "newton_mr");
    read(n, "reorthogonalize", cfg.newton_mr.reorthogonalize, "newton_mr");
    std::string mode, stop;
    read(n, "mode", mode, "newton_mr");
    read(n, "inner_stop", stop, "newton_mr");
    if (!mode.empty()) {
      if (mode == "exact") cfg.newton_mr.mode = NewtonMRMode::exact;
      else if (mode == "inexact") cfg.newton_mr.mode = NewtonMRMode::inexact;
      else throw ConfigError("newton_mr.mode must be exact or inexact");
    }
    if (!stop.empty()) {
      if (stop == "residual") cfg.newton_mr.inner_stop = InnerStop::residual;
      else if (stop == "feasibility") cfg.newton_mr.inner_stop = InnerStop::feasibility;
      else throw ConfigError("newton_mr.inner_stop must be residual or feasibility");
    }
  }
  if (root.contains("baseline")) {
    const json& b = root["baseline"];
    reject_unknown(b, {"armijo_c1", "wolfe_c2", "lbfgs_history", "max_linesearch"}, "baseline");
    read(b, "armijo_c1", cfg.baseline.armijo_c1, "baseline");
    read(b, "wolfe_c2", cfg.baseline.wolfe_c2, "baseline");
    read(b, "lbfgs_history", cfg.baseline.lbfgs_history, "baseline");
    read(b, "max_linesearch", cfg.baseline.max_linesearch, "baseline");
  }
  if (root.contains("krylov")) {
    const json& k = root["krylov"];
    reject_unknown(k, {"max_iters", "rel_residual_tol"}, "krylov");
    read(k, "max_iters", cfg.newton_mr.krylov.max_iters, "krylov");
    read(k, "rel_residual_tol", cfg.newton_mr.krylov.rel_residual_tol, "krylov");
  }
  if (root.contains("termination")) {
    const json& t = root["termination"];
    reject_unknown(t, {"epsilon_g", "max_outer_iters", "stall_window"}, "termination");
    read(t, "epsilon_g", cfg.epsilon_g, "termination");
    read(t, "max_outer_iters", cfg.max_outer_iters, "termination");
    read(t, "stall_window", cfg.newton_mr.stall_window, "termination");
  }
  if (root.contains("output")) {
    const json& o = root["output"];
    reject_unknown(o, {"trace", "dir"}, "output");
    read(o, "trace", cfg.trace_path, "output");
    read(o, "dir", cfg.out_dir, "output");
  }
  if (root.contains("profile")) {
    const json& p = root["profile"];
    reject_unknown(p, {"solvers", "runs", "seed", "threads", "grad_target", "f_rel_tol", "error_rel_tol",
                       "performance", "n_lambdas"},
                   "profile");
    if (p.contains("solvers")) {
      std::vector<std::string> names;
      read(p, "solvers", names, "profile");
      cfg.profile.solvers.clear();
      for (const std::string& s : names) cfg.profile.solvers.push_back(parse_solver(s));
    }
    read(p, "runs", cfg.profile.runs, "profile");
    read(p, "seed", cfg.profile.seed, "profile");
    read(p, "threads", cfg.profile.threads, "profile");
    read(p, "grad_target", cfg.profile.grad_target, "profile");
    read(p, "f_rel_tol", cfg.profile.f_rel_tol, "profile");
    read(p, "error_rel_tol", cfg.profile.error_rel_tol, "profile");
    read(p, "n_lambdas", cfg.profile.n_lambdas, "profile");
    std::string perf;
    read(p, "performance", perf, "profile");
    if (!perf.empty()) cfg.profile.performance = performance_mode_from_string(perf);
  }
  cfg.sync_termination();
  validate_solver_configs(cfg);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["problem"] = {{"name", cfg.problem.name}, {"data", cfg.problem.data_path}, {"test_data", cfg.problem.test_path},
                  {"n", cfg.problem.n},       {"p", cfg.problem.p},            {"classes", cfg.problem.num_classes},
                  {"seed", cfg.problem.seed}};
  j["solver"] = std::string(to_string(cfg.solver));
  j["newton_mr"] = {{"rho", cfg.newton_mr.rho},
                    {"theta", cfg.newton_mr.theta},
                    {"mode", cfg.newton_mr.mode == NewtonMRMode::exact ? "exact" : "inexact"},
                    {"inner_stop", cfg.newton_mr.inner_stop == InnerStop::residual ? "residual" : "feasibility"},
                    {"max_linesearch", cfg.newton_mr.max_linesearch},
                    {"reorthogonalize", cfg.newton_mr.reorthogonalize}};
  j["baseline"] = {{"armijo_c1", cfg.baseline.armijo_c1},
                   {"wolfe_c2", cfg.baseline.wolfe_c2},
                   {"lbfgs_history", cfg.baseline.lbfgs_history},
                   {"max_linesearch", cfg.baseline.max_linesearch}};
  j["krylov"] = {{"max_iters", cfg.newton_mr.krylov.max_iters},
                 {"rel_residual_tol", cfg.newton_mr.krylov.rel_residual_tol}};
  j["termination"] = {{"epsilon_g", cfg.epsilon_g},
                      {"max_outer_iters", cfg.max_outer_iters},
                      {"stall_window", cfg.newton_mr.stall_window}};
  j["output"] = {{"trace", cfg.trace_path}, {"dir", cfg.out_dir}};
  std::vector<std::string> solvers;
  for (SolverKind k : cfg.profile.solvers) solvers.emplace_back(to_string(k));
  j["profile"] = {{"solvers", solvers},
                  {"runs", cfg.profile.runs},
                  {"seed", cfg.profile.seed},
                  {"threads", cfg.profile.threads},
                  {"grad_target", cfg.profile.grad_target},
                  {"f_rel_tol", cfg.profile.f_rel_tol},
                  {"error_rel_tol", cfg.profile.error_rel_tol},
                  {"performance", std::string(to_string(cfg.profile.performance))},
                  {"n_lambdas", cfg.profile.n_lambdas}};
  return j.dump(2) + "\n";
}

}  // namespace newtonmr::harness
