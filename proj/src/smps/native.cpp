#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "tslp/error.hpp"
#include "tslp/smps.hpp"

namespace tslp {

namespace {

using nlohmann::ordered_json;

constexpr const char* kFormat = "tslp-native";
constexpr int kVersion = 1;

ordered_json num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) throw Error(ErrorCode::BadInput, "NaN in problem data");
  return v;
}

ordered_json nums(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

const char* sense_name(RowSense s) {
  switch (s) {
    case RowSense::LessEqual: return "<=";
    case RowSense::GreaterEqual: return ">=";
    case RowSense::Equal: return "=";
  }
  return "?";
}

const char* target_name(StochasticTarget t) {
  switch (t) {
    case StochasticTarget::T: return "T";
    case StochasticTarget::q: return "q";
    case StochasticTarget::h: return "h";
  }
  return "?";
}

ordered_json sparse(const SparseRow& r) {
  ordered_json a = ordered_json::array();
  for (std::size_t k = 0; k < r.size(); ++k) a.push_back(ordered_json::array({r.index[k], num(r.value[k])}));
  return a;
}

ordered_json matrix(const SparseMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : m.rows) rows.push_back(sparse(r));
  return ordered_json{{"cols", m.cols}, {"rows", rows}};
}

ordered_json address(const EntryAddress& a) {
  return ordered_json{{"target", target_name(a.target)}, {"row", a.row}, {"col", a.col}};
}

ordered_json overrides(const std::vector<Override>& os) {
  ordered_json a = ordered_json::array();
  for (const auto& o : os) a.push_back(ordered_json{{"at", address(o.at)}, {"value", num(o.value)}});
  return a;
}

ordered_json distribution(const ScenarioDistribution& d) {
  if (const auto* fl = std::get_if<FiniteList>(&d)) {
    ordered_json s = ordered_json::array();
    for (const auto& sc : fl->scenarios)
      s.push_back(ordered_json{{"weight", num(sc.weight)}, {"overrides", overrides(sc.overrides)}});
    return ordered_json{{"type", "finite"}, {"scenarios", s}};
  }
  if (const auto* ind = std::get_if<IndependentDiscrete>(&d)) {
    ordered_json ms = ordered_json::array();
    for (const auto& m : ind->marginals)
      ms.push_back(ordered_json{{"at", address(m.at)}, {"values", nums(m.values)}, {"probabilities", nums(m.probabilities)}});
    return ordered_json{{"type", "independent"}, {"marginals", ms}};
  }
  const auto& bd = std::get<BlockDiscrete>(d);
  ordered_json bs = ordered_json::array();
  for (const auto& b : bd.blocks) {
    ordered_json rs = ordered_json::array();
    for (const auto& r : b.realizations)
      rs.push_back(ordered_json{{"probability", num(r.probability)}, {"overrides", overrides(r.overrides)}});
    bs.push_back(ordered_json{{"name", b.name}, {"realizations", rs}});
  }
  return ordered_json{{"type", "blocks"}, {"blocks", bs}};
}

// ---------------------------------------------------------------------------
// Reading

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::MalformedDocument, where + ": " + what);
}

void keys(const ordered_json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) bad(where, "unknown key '" + k + "'");
  }
  for (const char* a : allowed)
    if (!j.contains(a)) bad(where, "missing key '" + std::string(a) + "'");
}

double read_num(const ordered_json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  bad(where, "expected a number");
}

std::size_t read_index(const ordered_json& j, const std::string& where) {
  if (!j.is_number_unsigned()) bad(where, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string read_string(const ordered_json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

const ordered_json& read_array(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array");
  return j;
}

Vector read_nums(const ordered_json& j, const std::string& where) {
  Vector v;
  for (const auto& x : read_array(j, where)) v.push_back(read_num(x, where));
  return v;
}

std::vector<std::string> read_strings(const ordered_json& j, const std::string& where) {
  std::vector<std::string> v;
  for (const auto& x : read_array(j, where)) v.push_back(read_string(x, where));
  return v;
}

RowSense read_sense(const ordered_json& j, const std::string& where) {
  const auto s = read_string(j, where);
  if (s == "<=") return RowSense::LessEqual;
  if (s == ">=") return RowSense::GreaterEqual;
  if (s == "=") return RowSense::Equal;
  bad(where, "unknown sense '" + s + "'");
}

SparseRow read_sparse(const ordered_json& j, const std::string& where) {
  SparseRow r;
  for (const auto& e : read_array(j, where)) {
    if (!e.is_array() || e.size() != 2) bad(where, "sparse entries are [index, value] pairs");
    const std::size_t idx = read_index(e[0], where);
    if (!r.index.empty() && idx <= r.index.back()) bad(where, "sparse indices must increase");
    r.index.push_back(idx);
    r.value.push_back(read_num(e[1], where));
  }
  return r;
}

SparseMatrix read_matrix(const ordered_json& j, const std::string& where) {
  keys(j, where, {"cols", "rows"});
  SparseMatrix m;
  m.cols = read_index(j["cols"], where + ".cols");
  for (const auto& r : read_array(j["rows"], where + ".rows")) m.rows.push_back(read_sparse(r, where + ".rows"));
  return m;
}

EntryAddress read_address(const ordered_json& j, const std::string& where) {
  keys(j, where, {"target", "row", "col"});
  EntryAddress a;
  const auto t = read_string(j["target"], where);
  if (t == "T") a.target = StochasticTarget::T;
  else if (t == "q") a.target = StochasticTarget::q;
  else if (t == "h") a.target = StochasticTarget::h;
  else bad(where, "unknown target '" + t + "'");
  a.row = read_index(j["row"], where);
  a.col = read_index(j["col"], where);
  return a;
}

std::vector<Override> read_overrides(const ordered_json& j, const std::string& where) {
  std::vector<Override> out;
  for (const auto& o : read_array(j, where)) {
    keys(o, where, {"at", "value"});
    out.push_back({read_address(o["at"], where), read_num(o["value"], where)});
  }
  return out;
}

ScenarioDistribution read_distribution(const ordered_json& j) {
  const std::string where = "distribution";
  if (!j.is_object() || !j.contains("type")) bad(where, "missing type");
  const auto type = read_string(j["type"], where);
  if (type == "finite") {
    keys(j, where, {"type", "scenarios"});
    FiniteList fl;
    for (const auto& s : read_array(j["scenarios"], where)) {
      keys(s, where + ".scenarios", {"weight", "overrides"});
      fl.scenarios.push_back({read_overrides(s["overrides"], where), read_num(s["weight"], where)});
    }
    return fl;
  }
  if (type == "independent") {
    keys(j, where, {"type", "marginals"});
    IndependentDiscrete ind;
    for (const auto& m : read_array(j["marginals"], where)) {
      keys(m, where + ".marginals", {"at", "values", "probabilities"});
      DiscreteMarginal dm;
      dm.at = read_address(m["at"], where);
      dm.values = read_nums(m["values"], where);
      dm.probabilities = read_nums(m["probabilities"], where);
      if (dm.values.size() != dm.probabilities.size()) bad(where, "values and probabilities differ in length");
      ind.marginals.push_back(std::move(dm));
    }
    return ind;
  }
  if (type == "blocks") {
    keys(j, where, {"type", "blocks"});
    BlockDiscrete bd;
    for (const auto& b : read_array(j["blocks"], where)) {
      keys(b, where + ".blocks", {"name", "realizations"});
      DiscreteBlock blk;
      blk.name = read_string(b["name"], where);
      for (const auto& r : read_array(b["realizations"], where)) {
        keys(r, where + ".realizations", {"probability", "overrides"});
        blk.realizations.push_back({read_num(r["probability"], where), read_overrides(r["overrides"], where)});
      }
      bd.blocks.push_back(std::move(blk));
    }
    return bd;
  }
  bad(where, "unknown type '" + type + "'");
}

}  // namespace

std::string write_native(const TwoStageProblem& p) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : p.first_stage_rows)
    rows.push_back(ordered_json{{"name", r.name}, {"sense", sense_name(r.sense)}, {"rhs", num(r.rhs)},
                                {"coefficients", sparse(r.coefficients)}});
  ordered_json senses = ordered_json::array();
  for (auto s : p.recourse_sense) senses.push_back(sense_name(s));

  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["name"] = p.name;
  j["first_stage"] = ordered_json{{"c", nums(p.c)},           {"x_lower", nums(p.x_lower)},
                                  {"x_upper", nums(p.x_upper)}, {"x_names", p.x_names},
                                  {"rows", rows}};
  j["recourse"] = ordered_json{{"W", matrix(p.W)},         {"sense", senses},
                               {"y_lower", nums(p.y_lower)}, {"y_upper", nums(p.y_upper)},
                               {"y_names", p.y_names},     {"row_names", p.recourse_row_names}};
  j["stochastic"] = ordered_json{{"T", matrix(p.base_T)}, {"q", nums(p.base_q)}, {"h", nums(p.base_h)}};
  j["distribution"] = distribution(p.distribution);
  return j.dump(1) + "\n";
}

TwoStageProblem parse_native(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("not a JSON document: ") + e.what());
  }
  keys(j, "document", {"format", "version", "name", "first_stage", "recourse", "stochastic", "distribution"});
  if (j["format"] != kFormat) bad("format", "expected \"" + std::string(kFormat) + "\"");
  if (j["version"] != kVersion) bad("version", "unsupported version");

  TwoStageProblem p;
  p.name = read_string(j["name"], "name");

  const auto& fs = j["first_stage"];
  keys(fs, "first_stage", {"c", "x_lower", "x_upper", "x_names", "rows"});
  p.c = read_nums(fs["c"], "first_stage.c");
  p.x_lower = read_nums(fs["x_lower"], "first_stage.x_lower");
  p.x_upper = read_nums(fs["x_upper"], "first_stage.x_upper");
  p.x_names = read_strings(fs["x_names"], "first_stage.x_names");
  for (const auto& r : read_array(fs["rows"], "first_stage.rows")) {
    keys(r, "first_stage.rows", {"name", "sense", "rhs", "coefficients"});
    LinearRow row;
    row.name = read_string(r["name"], "first_stage.rows");
    row.sense = read_sense(r["sense"], "first_stage.rows");
    row.rhs = read_num(r["rhs"], "first_stage.rows");
    row.coefficients = read_sparse(r["coefficients"], "first_stage.rows");
    p.first_stage_rows.push_back(std::move(row));
  }

  const auto& rc = j["recourse"];
  keys(rc, "recourse", {"W", "sense", "y_lower", "y_upper", "y_names", "row_names"});
  p.W = read_matrix(rc["W"], "recourse.W");
  for (const auto& s : read_array(rc["sense"], "recourse.sense")) p.recourse_sense.push_back(read_sense(s, "recourse.sense"));
  p.y_lower = read_nums(rc["y_lower"], "recourse.y_lower");
  p.y_upper = read_nums(rc["y_upper"], "recourse.y_upper");
  p.y_names = read_strings(rc["y_names"], "recourse.y_names");
  p.recourse_row_names = read_strings(rc["row_names"], "recourse.row_names");

  const auto& st = j["stochastic"];
  keys(st, "stochastic", {"T", "q", "h"});
  p.base_T = read_matrix(st["T"], "stochastic.T");
  p.base_q = read_nums(st["q"], "stochastic.q");
  p.base_h = read_nums(st["h"], "stochastic.h");

  p.distribution = read_distribution(j["distribution"]);
  check_structure(p);
  return p;
}

TwoStageProblem load_native(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_native(ss.str());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void save_native(const TwoStageProblem& problem, const std::filesystem::path& path) {
  const std::string text = write_native(problem);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace tslp
