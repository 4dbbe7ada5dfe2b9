#include "tslp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tslp/bounds.hpp"
#include "tslp/error.hpp"
#include "tslp/format.hpp"
#include "tslp/lshaped.hpp"
#include "tslp/smps.hpp"

namespace tslp::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

/// Bad command line or configuration document.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config document helpers

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw UsageError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw UsageError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
std::optional<T> opt(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(where + "." + key + ": wrong type");
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// Options gathered from the config document and the command line

struct Options {
  // instance
  std::string native;
  std::string smps_dir, smps_stem, smps_core, smps_time, smps_stoch;
  std::string gen_name;
  json gen_params = json::object();

  // solver
  SolverConfig solver;
  bool policy_given = false;

  // outputs
  std::string trace_out, summary_out, out;
  std::optional<std::size_t> eval_size;

  // bounds
  std::size_t batches = 50, batch_size = 100;

  // bench
  std::vector<double> bench_rho{100, 10, 1, 0.1}, bench_cp{100, 10, 1, 0.1};
  std::optional<double> bench_f_star;
  std::size_t bench_seeds = 10;
  std::size_t bench_eval = 1000;
  std::size_t bench_keep = 50;

  // check
  TheoryInputs theory;
};

StepSizePolicy policy_from_json(const json& j, const std::string& where) {
  only_keys(j, where, {"name", "rho", "cp", "f_star", "diameter", "eps2", "mu", "v", "eps_bar"});
  const auto name = opt<std::string>(j, "name", where);
  if (!name) throw UsageError(where + ": missing name");
  auto num = [&](const char* k, double def) { return opt<double>(j, k, where).value_or(def); };
  if (*name == "constant") return ConstantPolicy{num("rho", 1.0)};
  if (*name == "practical") return PracticalPolicy{num("cp", 1.0)};
  if (*name == "optimal") {
    const auto fs = opt<double>(j, "f_star", where);
    if (!fs) throw UsageError(where + ": optimal policy needs f_star");
    return OptimalPolicy{*fs, opt<double>(j, "diameter", where), num("eps2", 0.0)};
  }
  if (*name == "sharp-constant") return SharpConstantPolicy{num("mu", 1.0), num("v", 0.5), num("eps_bar", 1.0)};
  if (*name == "sharp-optimal") {
    const auto fs = opt<double>(j, "f_star", where);
    if (!fs) throw UsageError(where + ": sharp-optimal policy needs f_star");
    return SharpOptimalPolicy{num("mu", 1.0), *fs, num("eps2", 0.0)};
  }
  throw UsageError(where + ": unknown policy '" + *name + "'");
}

void apply_samples(SolverConfig& s, const json& v, const std::string& where) {
  if (v.is_string() && v.get<std::string>() == "exact") {
    s.exact_oracle = true;
  } else if (v.is_number_unsigned()) {
    s.exact_oracle = false;
    s.sample_size = v.get<std::size_t>();
  } else {
    throw UsageError(where + ": samples must be a positive integer or \"exact\"");
  }
}

void load_config(Options& o, const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw UsageError(path + ": not a JSON document: " + e.what());
  }
  only_keys(j, path, {"instance", "solver", "seed", "output", "evaluate", "bounds", "bench", "gen", "theory"});
  if (auto s = opt<std::uint64_t>(j, "seed", path)) o.solver.seed = *s;

  if (j.contains("instance")) {
    const auto& in = j["instance"];
    const std::string w = path + ":instance";
    only_keys(in, w, {"native", "smps", "generator"});
    if (in.size() != 1) throw UsageError(w + ": give exactly one of native, smps, generator");
    if (auto n = opt<std::string>(in, "native", w)) o.native = *n;
    if (in.contains("smps")) {
      const auto& s = in["smps"];
      only_keys(s, w + ".smps", {"dir", "stem", "core", "time", "stoch"});
      o.smps_dir = opt<std::string>(s, "dir", w).value_or("");
      o.smps_stem = opt<std::string>(s, "stem", w).value_or("");
      o.smps_core = opt<std::string>(s, "core", w).value_or("");
      o.smps_time = opt<std::string>(s, "time", w).value_or("");
      o.smps_stoch = opt<std::string>(s, "stoch", w).value_or("");
      if (o.smps_dir.empty() && (o.smps_core.empty() || o.smps_time.empty() || o.smps_stoch.empty()))
        throw UsageError(w + ".smps: give dir or all of core, time, stoch");
    }
    if (in.contains("generator")) {
      const auto& g = in["generator"];
      only_keys(g, w + ".generator", {"name", "params"});
      o.gen_name = opt<std::string>(g, "name", w).value_or("");
      if (g.contains("params")) o.gen_params = g["params"];
    }
  }

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    const std::string w = path + ":solver";
    only_keys(s, w, {"beta", "samples", "policy", "memory", "max_outer", "max_inner", "max_wall_seconds", "stop_tol",
                     "threads", "x0", "G", "eps1", "eps2", "record_wall_time", "keep_last"});
    auto& c = o.solver;
    if (auto v = opt<double>(s, "beta", w)) c.beta = *v;
    if (s.contains("samples")) apply_samples(c, s["samples"], w + ".samples");
    if (s.contains("policy")) {
      c.policy = policy_from_json(s["policy"], w + ".policy");
      o.policy_given = true;
    }
    if (auto v = opt<std::size_t>(s, "memory", w)) c.memory = *v;
    if (auto v = opt<std::size_t>(s, "max_outer", w)) c.max_outer = *v;
    if (auto v = opt<std::size_t>(s, "max_inner", w)) c.max_total_inner = *v;
    if (auto v = opt<double>(s, "max_wall_seconds", w)) c.max_wall_seconds = *v;
    if (auto v = opt<double>(s, "stop_tol", w)) c.stop_tol = *v;
    if (auto v = opt<std::size_t>(s, "threads", w)) c.threads = *v;
    if (auto v = opt<std::vector<double>>(s, "x0", w)) c.x0 = *v;
    c.G = opt<double>(s, "G", w);
    c.eps1 = opt<double>(s, "eps1", w);
    c.eps2 = opt<double>(s, "eps2", w);
    if (auto v = opt<bool>(s, "record_wall_time", w)) c.record_wall_time = *v;
    if (auto v = opt<std::size_t>(s, "keep_last", w)) c.keep_last = *v;
  }

  if (j.contains("output")) {
    const auto& s = j["output"];
    only_keys(s, path + ":output", {"trace", "summary", "out"});
    o.trace_out = opt<std::string>(s, "trace", path).value_or("");
    o.summary_out = opt<std::string>(s, "summary", path).value_or("");
    o.out = opt<std::string>(s, "out", path).value_or("");
  }
  if (j.contains("evaluate")) {
    const auto& s = j["evaluate"];
    only_keys(s, path + ":evaluate", {"size"});
    o.eval_size = opt<std::size_t>(s, "size", path);
  }
  if (j.contains("bounds")) {
    const auto& s = j["bounds"];
    only_keys(s, path + ":bounds", {"batches", "batch_size"});
    o.batches = opt<std::size_t>(s, "batches", path).value_or(o.batches);
    o.batch_size = opt<std::size_t>(s, "batch_size", path).value_or(o.batch_size);
  }
  if (j.contains("bench")) {
    const auto& s = j["bench"];
    only_keys(s, path + ":bench", {"constant", "practical", "f_star", "seeds", "eval_size", "keep_last"});
    const std::string w = path + ":bench";
    if (auto v = opt<std::vector<double>>(s, "constant", w)) o.bench_rho = *v;
    if (auto v = opt<std::vector<double>>(s, "practical", w)) o.bench_cp = *v;
    o.bench_f_star = opt<double>(s, "f_star", w);
    o.bench_seeds = opt<std::size_t>(s, "seeds", w).value_or(o.bench_seeds);
    o.bench_eval = opt<std::size_t>(s, "eval_size", w).value_or(o.bench_eval);
    o.bench_keep = opt<std::size_t>(s, "keep_last", w).value_or(o.bench_keep);
  }
  if (j.contains("gen")) {
    const auto& s = j["gen"];
    only_keys(s, path + ":gen", {"name", "params"});
    o.gen_name = opt<std::string>(s, "name", path).value_or(o.gen_name);
    if (s.contains("params")) o.gen_params = s["params"];
  }
  if (j.contains("theory")) {
    const auto& s = j["theory"];
    const std::string w = path + ":theory";
    only_keys(s, w, {"G", "D", "eps1", "eps2", "rho", "f0", "f_star", "mu", "v"});
    auto& t = o.theory;
    t.eps1 = opt<double>(s, "eps1", w).value_or(0.0);
    t.eps2 = opt<double>(s, "eps2", w).value_or(0.0);
    t.G = opt<double>(s, "G", w);
    t.D = opt<double>(s, "D", w);
    t.rho = opt<double>(s, "rho", w);
    t.f0 = opt<double>(s, "f0", w);
    t.f_star = opt<double>(s, "f_star", w);
    t.mu = opt<double>(s, "mu", w);
    t.v = opt<double>(s, "v", w);
  }
}

// ---------------------------------------------------------------------------
// Instances

TwoStageProblem generate(const std::string& name, const json& params) {
  const std::string w = "generator " + name;
  if (name == "tiny_inventory" || name == "tiny_inventory_deterministic") {
    if (!params.empty()) throw UsageError(w + " takes no parameters");
    return name == "tiny_inventory" ? tiny_inventory() : tiny_inventory_deterministic();
  }
  if (name == "inventory_random") {
    only_keys(params, w, {"items", "scenarios", "seed"});
    return gen_inventory_random(opt<std::size_t>(params, "items", w).value_or(3),
                                opt<std::size_t>(params, "scenarios", w).value_or(100),
                                opt<std::uint64_t>(params, "seed", w).value_or(1));
  }
  if (name == "random") {
    only_keys(params, w, {"n", "recourse_rows", "extra_columns", "scenarios", "seed"});
    RandomInstanceParams rp;
    rp.n = opt<std::size_t>(params, "n", w).value_or(rp.n);
    rp.recourse_rows = opt<std::size_t>(params, "recourse_rows", w).value_or(rp.recourse_rows);
    rp.extra_columns = opt<std::size_t>(params, "extra_columns", w).value_or(rp.extra_columns);
    rp.scenarios = opt<std::size_t>(params, "scenarios", w).value_or(rp.scenarios);
    rp.seed = opt<std::uint64_t>(params, "seed", w).value_or(rp.seed);
    return gen_random(rp);
  }
  if (name == "inventory") {
    only_keys(params, w, {"items", "price", "holding", "budget", "selling", "ratio", "customers"});
    InventoryParams ip;
    ip.items = opt<std::size_t>(params, "items", w).value_or(ip.items);
    ip.price = opt<Vector>(params, "price", w).value_or(Vector{});
    ip.holding = opt<Vector>(params, "holding", w).value_or(Vector{});
    ip.budget = opt<double>(params, "budget", w).value_or(ip.budget);
    ip.selling = opt<Vector>(params, "selling", w).value_or(Vector{});
    ip.ratio = opt<double>(params, "ratio", w).value_or(ip.ratio);
    if (params.contains("customers")) {
      for (const auto& row : params["customers"]) {
        if (!row.is_array() || row.size() != 2) throw UsageError(w + ": customers entries are [probability, [c...]]");
        ip.customers.emplace_back(row[0].get<double>(), row[1].get<Vector>());
      }
    }
    return gen_inventory(ip);
  }
  throw UsageError("unknown generator '" + name + "'");
}

TwoStageProblem load_instance(const Options& o) {
  const int sources = !o.native.empty() + (!o.smps_dir.empty() || !o.smps_core.empty()) + !o.gen_name.empty();
  if (sources == 0) throw UsageError("no instance: give --instance, --smps, --gen or an instance block in --config");
  if (sources > 1) throw UsageError("more than one instance source given");
  TwoStageProblem p;
  if (!o.native.empty()) {
    p = load_native(o.native);
  } else if (!o.gen_name.empty()) {
    p = generate(o.gen_name, o.gen_params);
  } else {
    p = parse_smps(o.smps_dir.empty() ? read_smps_files(o.smps_core, o.smps_time, o.smps_stoch)
                                      : find_smps_triplet(o.smps_dir, o.smps_stem));
  }
  validate(p);
  return p;
}

// ---------------------------------------------------------------------------
// Commands

int exit_for(StopReason r) { return is_budget_stop(r) ? kExitBudget : kExitOk; }

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const TwoStageProblem p = load_instance(o);
  const RunResult r = run(p, o.solver);
  if (!o.trace_out.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    write_text(o.trace_out, csv.str(), out);
  }
  auto summary = ordered_json::parse(summary_document(r, o.solver));
  if (o.eval_size) {
    const auto e = evaluate_candidates(p, r.last_iterates, *o.eval_size, o.solver.seed, o.solver.threads);
    summary["evaluation"] = ordered_json{{"size", *o.eval_size},
                                         {"seed", o.solver.seed},
                                         {"best_value", e.best_value},
                                         {"best_index", e.best_index},
                                         {"best_iterate", e.best_iterate}};
  }
  write_text(o.summary_out, summary.dump(2) + "\n", out);
  if (is_budget_stop(r.reason)) err << "tslp: stopped on " << to_string(r.reason) << "\n";
  return exit_for(r.reason);
}

int cmd_bounds(const Options& o, std::ostream& out) {
  const TwoStageProblem p = load_instance(o);
  const BoundEstimate b = saa_lower_bound(p, o.batches, o.batch_size, o.solver.seed, o.solver.threads);
  write_text(o.out, bound_report(b), out);
  return kExitOk;
}

struct BenchCell {
  std::string label;
  StepSizePolicy policy;
  std::vector<double> best;
  BoundEstimate stats;
};

int cmd_bench(const Options& o, std::ostream& out) {
  std::vector<BenchCell> cells;
  for (double rho : o.bench_rho) cells.push_back({"constant rho=" + format_double(rho), ConstantPolicy{rho}, {}, {}});
  for (double cp : o.bench_cp) cells.push_back({"practical C_P=" + format_double(cp), PracticalPolicy{cp}, {}, {}});
  if (o.bench_f_star) cells.push_back({"optimal", OptimalPolicy{*o.bench_f_star, std::nullopt, 0.0}, {}, {}});
  if (cells.empty()) throw UsageError("bench needs at least one step-size policy");
  if (o.bench_seeds == 0) throw UsageError("bench needs at least one seed");
  for (const auto& c : cells) check_policy(c.policy);

  const TwoStageProblem p = load_instance(o);
  SampleSet full;
  if (o.solver.exact_oracle) full = full_scenario_set(p.distribution);
  for (auto& cell : cells) {
    for (std::size_t s = 0; s < o.bench_seeds; ++s) {
      SolverConfig c = o.solver;
      c.policy = cell.policy;
      c.seed = o.solver.seed + s;
      c.keep_last = o.bench_keep;
      const RunResult r = run(p, c);
      const auto e = o.solver.exact_oracle
                         ? evaluate_candidates(p, r.last_iterates, full, c.threads)
                         : evaluate_candidates(p, r.last_iterates, o.bench_eval, c.seed, c.threads);
      cell.best.push_back(e.best_value);
    }
    cell.stats = summarize(cell.best, 0, o.solver.seed);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i)
    if (cells[i].stats.mean < cells[best].stats.mean) best = i;

  ordered_json rows = ordered_json::array();
  std::ostringstream table;
  table << std::left << std::setw(24) << "policy" << std::right << std::setw(16) << "mean" << std::setw(14)
        << "+/- (95%)" << "\n";
  table << std::setprecision(6) << std::fixed;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    table << std::left << std::setw(24) << c.label << std::right << std::setw(16) << c.stats.mean << std::setw(14);
    if (c.stats.half_width) table << *c.stats.half_width;
    else table << "-";
    table << (i == best ? "  best" : "") << "\n";
    ordered_json row{{"policy", policy_name(c.policy)}, {"label", c.label}, {"mean", c.stats.mean}, {"values", c.best}};
    row["half_width_95"] = c.stats.half_width ? ordered_json(*c.stats.half_width) : ordered_json(nullptr);
    rows.push_back(row);
  }
  ordered_json doc{{"seeds", o.bench_seeds},
                   {"first_seed", o.solver.seed},
                   {"eval_size", o.solver.exact_oracle ? ordered_json("exact") : ordered_json(o.bench_eval)},
                   {"best", cells[best].label},
                   {"rows", rows}};
  if (o.out.empty()) {
    out << table.str();
  } else {
    write_text(o.out, doc.dump(2) + "\n", out);
    out << table.str();
  }
  return kExitOk;
}

int cmd_gen(const Options& o, std::ostream& out) {
  if (o.gen_name.empty()) throw UsageError("gen needs a generator name (--gen)");
  const TwoStageProblem p = generate(o.gen_name, o.gen_params);
  validate(p);
  write_text(o.out, write_native(p), out);
  return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out) {
  const TwoStageProblem p = load_instance(o);
  const ValidationReport rep = validate(p);
  ordered_json doc;
  doc["name"] = p.name;
  doc["n"] = p.n();
  doc["m"] = p.m();
  doc["l"] = p.l();
  doc["r"] = p.r();
  doc["scenarios"] = rep.scenario_count;
  doc["diameter"] = rep.diameter;
  doc["feasible_point"] = rep.feasible_point;
  doc["notes"] = rep.notes;

  TheoryInputs t = o.theory;
  t.beta = o.solver.beta;
  if (!t.D) t.D = rep.diameter;
  ordered_json bounds = ordered_json::object();
  const std::pair<BoundFamily, const char*> fams[] = {{BoundFamily::Constant, "constant"},
                                                      {BoundFamily::Optimal, "optimal"},
                                                      {BoundFamily::SharpConstant, "sharp-constant"},
                                                      {BoundFamily::SharpOptimal, "sharp-optimal"}};
  for (auto [fam, name] : fams) {
    try {
      const TheoryBounds b = theory_bounds(t, fam);
      ordered_json jb{{"eps_bar", b.eps_bar}, {"exact_oracle", b.exact_oracle}, {"delta", b.delta}};
      auto put = [&](const char* k, const std::optional<double>& v) { jb[k] = v ? ordered_json(*v) : ordered_json(nullptr); };
      put("outer", b.outer);
      put("inner_per_outer", b.inner_per_outer);
      put("total_inner", b.total_inner);
      bounds[name] = jb;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingParameter) throw;
      bounds[name] = ordered_json{{"missing", e.detail()}};
    }
  }
  doc["theory"] = bounds;
  write_text(o.out, doc.dump(2) + "\n", out);
  return kExitOk;
}

int exit_code_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::BadParameter:
    case ErrorCode::MissingParameter:
      return kExitUsage;
    case ErrorCode::IterationLimit:
    case ErrorCode::NumericalBreakdown:
    case ErrorCode::Infeasible:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage stochastic LP solver (inexact regularized L-shaped method)", "tslp"};
  app.require_subcommand(1);

  std::string config, policy, samples, instance, smps, gen;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho, cp, beta, stop_tol, f_star, mu, v, eps_bar, max_wall;
  std::optional<std::size_t> memory, max_inner, max_outer, threads, eval_size, batches, batch_size, seeds;
  std::string trace_out, summary_out, out_path;
  std::vector<double> bench_rho, bench_cp;

  app.add_option("--config", config, "JSON configuration document");
  app.add_option("--instance", instance, "native instance file");
  app.add_option("--smps", smps, "directory holding one SMPS triplet (or DIR:STEM)");
  app.add_option("--gen", gen, "generator name");
  app.add_option("--seed", seed, "root seed");
  app.add_option("--policy", policy, "constant | practical | optimal | sharp-constant | sharp-optimal");
  app.add_option("--rho", rho, "constant step size");
  app.add_option("--cp", cp, "practical policy constant C_P");
  app.add_option("--f-star", f_star, "optimal value for the optimal policies");
  app.add_option("--mu", mu, "sharpness constant");
  app.add_option("--v", v, "sharp-constant parameter v in (0, 1)");
  app.add_option("--eps-bar", eps_bar, "noise level for the sharp-constant policy");
  app.add_option("--beta", beta, "descent parameter in (0, 1)");
  app.add_option("--samples", samples, "scenarios per outer iteration, or 'exact'");
  app.add_option("--memory", memory, "cuts kept per kind");
  app.add_option("--max-inner", max_inner, "total inner-step budget");
  app.add_option("--max-outer", max_outer, "outer-step budget");
  app.add_option("--max-seconds", max_wall, "wall-clock budget");
  app.add_option("--stop-tol", stop_tol, "stop when delta_tilde at a serious step is at most this");
  app.add_option("--threads", threads, "oracle worker threads");
  app.add_option("--trace-out", trace_out, "trace CSV path");
  app.add_option("--summary-out", summary_out, "summary JSON path");
  app.add_option("--out", out_path, "output path for bounds, bench, gen and check");
  app.add_option("--eval-size", eval_size, "evaluate the last iterates on this many fresh scenarios");
  app.add_option("--batches", batches, "SAA batches");
  app.add_option("--batch-size", batch_size, "scenarios per SAA batch");
  app.add_option("--seeds", seeds, "bench seeds");
  app.add_option("--bench-rho", bench_rho, "bench constant step sizes")->delimiter(',');
  app.add_option("--bench-cp", bench_cp, "bench practical constants")->delimiter(',');

  auto* solve = app.add_subcommand("solve", "run the solver")->fallthrough();
  auto* bounds = app.add_subcommand("bounds", "SAA lower bound")->fallthrough();
  auto* bench = app.add_subcommand("bench", "policy sweep over seeds")->fallthrough();
  auto* gen_cmd = app.add_subcommand("gen", "write a generated instance in native format")->fallthrough();
  auto* check = app.add_subcommand("check", "validate an instance and evaluate theory bounds")->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "tslp: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    Options o;
    if (!config.empty()) load_config(o, config);
    if (!instance.empty()) o.native = instance, o.smps_dir.clear(), o.gen_name.clear();
    if (!smps.empty()) {
      o.native.clear();
      o.gen_name.clear();
      o.smps_core.clear();
      const auto colon = smps.rfind(':');
      o.smps_dir = colon == std::string::npos ? smps : smps.substr(0, colon);
      o.smps_stem = colon == std::string::npos ? "" : smps.substr(colon + 1);
    }
    if (!gen.empty()) {
      if (!(o.gen_name == gen)) o.gen_params = json::object();
      o.gen_name = gen;
      if (!gen_cmd->parsed()) o.native.clear(), o.smps_dir.clear(), o.smps_core.clear();
    }

    auto& s = o.solver;
    if (seed) s.seed = *seed;
    if (beta) s.beta = *beta;
    if (!samples.empty()) {
      if (samples == "exact") {
        s.exact_oracle = true;
      } else {
        try {
          std::size_t pos = 0;
          const long long n = std::stoll(samples, &pos);
          if (pos != samples.size() || n <= 0) throw std::invalid_argument(samples);
          s.exact_oracle = false;
          s.sample_size = static_cast<std::size_t>(n);
        } catch (const std::exception&) {
          throw UsageError("--samples must be a positive integer or 'exact'");
        }
      }
    }
    if (memory) s.memory = *memory;
    if (max_inner) s.max_total_inner = *max_inner;
    if (max_outer) s.max_outer = *max_outer;
    if (max_wall) s.max_wall_seconds = *max_wall;
    if (stop_tol) s.stop_tol = *stop_tol;
    if (threads) s.threads = *threads;

    std::string pname = policy;
    if (pname.empty() && !o.policy_given) {
      if (rho) pname = "constant";
      else if (cp) pname = "practical";
    }
    if (!pname.empty()) {
      json pj{{"name", pname}};
      // carry over parameters from the config policy of the same kind
      if (policy_name(s.policy) == pname) {
        std::visit([&](const auto& cur) {
          using T = std::decay_t<decltype(cur)>;
          if constexpr (std::is_same_v<T, ConstantPolicy>) pj["rho"] = cur.rho;
          if constexpr (std::is_same_v<T, PracticalPolicy>) pj["cp"] = cur.cp;
          if constexpr (std::is_same_v<T, OptimalPolicy>) {
            pj["f_star"] = cur.f_star;
            pj["eps2"] = cur.eps2;
            if (cur.diameter) pj["diameter"] = *cur.diameter;
          }
          if constexpr (std::is_same_v<T, SharpConstantPolicy>) pj["mu"] = cur.mu, pj["v"] = cur.v, pj["eps_bar"] = cur.eps_bar;
          if constexpr (std::is_same_v<T, SharpOptimalPolicy>) pj["mu"] = cur.mu, pj["f_star"] = cur.f_star, pj["eps2"] = cur.eps2;
        }, s.policy);
      }
      s.policy = policy_from_json(pj, "--policy");
    }
    std::visit([&](auto& cur) {
      using T = std::decay_t<decltype(cur)>;
      if constexpr (std::is_same_v<T, ConstantPolicy>) { if (rho) cur.rho = *rho; }
      if constexpr (std::is_same_v<T, PracticalPolicy>) { if (cp) cur.cp = *cp; }
      if constexpr (std::is_same_v<T, OptimalPolicy>) { if (f_star) cur.f_star = *f_star; }
      if constexpr (std::is_same_v<T, SharpConstantPolicy>) {
        if (mu) cur.mu = *mu;
        if (v) cur.v = *v;
        if (eps_bar) cur.eps_bar = *eps_bar;
      }
      if constexpr (std::is_same_v<T, SharpOptimalPolicy>) {
        if (mu) cur.mu = *mu;
        if (f_star) cur.f_star = *f_star;
      }
    }, s.policy);
    if (f_star) o.bench_f_star = *f_star, o.theory.f_star = *f_star;

    if (!trace_out.empty()) o.trace_out = trace_out;
    if (!summary_out.empty()) o.summary_out = summary_out;
    if (!out_path.empty()) o.out = out_path;
    if (eval_size) o.eval_size = *eval_size;
    if (batches) o.batches = *batches;
    if (batch_size) o.batch_size = *batch_size;
    if (seeds) o.bench_seeds = *seeds;
    if (app.get_option("--bench-rho")->count()) o.bench_rho = bench_rho;
    if (app.get_option("--bench-cp")->count()) o.bench_cp = bench_cp;
    if (eval_size) o.bench_eval = *eval_size;

    check_config(s);
    if (solve->parsed()) return cmd_solve(o, out, err);
    if (bounds->parsed()) return cmd_bounds(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
    if (gen_cmd->parsed()) return cmd_gen(o, out);
    if (check->parsed()) return cmd_check(o, out);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "tslp: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "tslp: error: " << e.what() << "\n";
    return exit_code_of(e.code());
  } catch (const std::exception& e) {
    err << "tslp: internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace tslp::cli
