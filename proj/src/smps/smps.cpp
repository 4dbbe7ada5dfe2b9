#include "tslp/smps.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "tslp/error.hpp"

namespace tslp {

namespace {

struct Line {
  std::size_t number = 0;
  bool header = false;  // starts in column one
  std::vector<std::string> tok;
};

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() || raw[0] == '*') continue;
    Line line;
    line.number = number;
    line.header = !std::isspace(static_cast<unsigned char>(raw[0]));
    std::istringstream fields(raw);
    std::string t;
    while (fields >> t) line.tok.push_back(t);
    if (line.tok.empty()) continue;
    out.push_back(std::move(line));
  }
  return out;
}

class Source {
 public:
  explicit Source(std::string name) : name_(std::move(name)) {}

  [[noreturn]] void fail(const Line& l, const std::string& what, ErrorCode code = ErrorCode::MalformedLine) const {
    throw Error(code, name_ + ":" + std::to_string(l.number) + ": " + what);
  }
  double number(const Line& l, const std::string& s) const {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      // from_chars does not take a leading '+'
      if (!s.empty() && s[0] == '+') {
        res = std::from_chars(s.data() + 1, end, v);
        if (res.ec == std::errc() && res.ptr == end) return v;
      }
      fail(l, "expected a number, got '" + s + "'");
    }
    return v;
  }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// ---------------------------------------------------------------------------
// CORE

struct CoreRow {
  std::string name;
  char type = 'L';
  std::map<std::size_t, double> coef;  // by column index
  double rhs = 0.0;
  std::optional<double> range;
};

struct Core {
  std::string name;
  std::string objective;
  std::vector<CoreRow> rows;  // constraint rows only, in file order
  std::unordered_map<std::string, std::size_t> row_index;
  std::map<std::size_t, double> cost;
  std::vector<std::string> cols;
  std::unordered_map<std::string, std::size_t> col_index;
  std::vector<double> lower, upper;
  std::vector<std::string> rhs_sets;
};

Core parse_core(const std::string& text, const std::string& source, std::vector<std::string>* warnings) {
  const Source src(source);
  Core core;
  std::string section;
  bool ended = false;
  bool objective_rhs_warned = false;

  auto col_of = [&](const Line& l, const std::string& name) -> std::size_t {
    auto it = core.col_index.find(name);
    if (it == core.col_index.end()) src.fail(l, "unknown column '" + name + "'", ErrorCode::UnknownRowOrColumn);
    return it->second;
  };
  auto row_of = [&](const Line& l, const std::string& name) -> CoreRow* {
    if (name == core.objective) return nullptr;
    auto it = core.row_index.find(name);
    if (it == core.row_index.end()) src.fail(l, "unknown row '" + name + "'", ErrorCode::UnknownRowOrColumn);
    return &core.rows[it->second];
  };
  // Pairs (row, value) starting at token `from`.
  auto pairs = [&](const Line& l, std::size_t from, auto&& apply) {
    if ((l.tok.size() - from) % 2 != 0 || l.tok.size() == from) src.fail(l, "expected name/value pairs");
    for (std::size_t i = from; i < l.tok.size(); i += 2) apply(l.tok[i], src.number(l, l.tok[i + 1]));
  };

  for (const Line& l : split_lines(text)) {
    if (ended) src.fail(l, "data after ENDATA");
    if (l.header) {
      section = upper(l.tok[0]);
      if (section == "NAME") {
        core.name = l.tok.size() > 1 ? l.tok[1] : "";
      } else if (section == "ENDATA") {
        ended = true;
      } else if (section == "OBJSENSE" || section == "OBJSENS") {
        if (l.tok.size() > 1 && upper(l.tok[1]) == "MAX") src.fail(l, "maximization is not supported", ErrorCode::UnsupportedSection);
      } else if (section != "ROWS" && section != "COLUMNS" && section != "RHS" && section != "RANGES" &&
                 section != "BOUNDS") {
        src.fail(l, "unsupported CORE section " + section, ErrorCode::UnsupportedSection);
      }
      continue;
    }
    if (section == "OBJSENSE" || section == "OBJSENS") {
      if (upper(l.tok[0]) == "MAX" || upper(l.tok[0]) == "MAXIMIZE")
        src.fail(l, "maximization is not supported", ErrorCode::UnsupportedSection);
    } else if (section == "ROWS") {
      if (l.tok.size() != 2) src.fail(l, "ROWS line needs a type and a name");
      const std::string type = upper(l.tok[0]);
      if (type == "N") {
        if (!core.objective.empty()) src.fail(l, "a second free row is not supported", ErrorCode::UnsupportedSection);
        core.objective = l.tok[1];
        continue;
      }
      if (type != "L" && type != "G" && type != "E") src.fail(l, "unknown row type '" + l.tok[0] + "'");
      if (core.row_index.count(l.tok[1]) || l.tok[1] == core.objective) src.fail(l, "duplicate row '" + l.tok[1] + "'");
      core.row_index[l.tok[1]] = core.rows.size();
      CoreRow row;
      row.name = l.tok[1];
      row.type = type[0];
      core.rows.push_back(std::move(row));
    } else if (section == "COLUMNS") {
      if (l.tok.size() >= 2 && (l.tok[1] == "'MARKER'" || upper(l.tok[1]) == "MARKER")) continue;
      const std::string& name = l.tok[0];
      std::size_t j;
      auto it = core.col_index.find(name);
      if (it == core.col_index.end()) {
        j = core.cols.size();
        core.col_index[name] = j;
        core.cols.push_back(name);
        core.lower.push_back(0.0);
        core.upper.push_back(kInf);
      } else {
        j = it->second;
        if (j + 1 != core.cols.size()) src.fail(l, "column '" + name + "' is not contiguous");
      }
      pairs(l, 1, [&](const std::string& r, double v) {
        CoreRow* row = row_of(l, r);
        if (row)
          row->coef[j] = v;
        else
          core.cost[j] = v;
      });
    } else if (section == "RHS" || section == "RANGES") {
      const std::size_t from = l.tok.size() % 2 == 0 ? 0 : 1;
      if (section == "RHS" && from == 1 &&
          std::find(core.rhs_sets.begin(), core.rhs_sets.end(), l.tok[0]) == core.rhs_sets.end())
        core.rhs_sets.push_back(l.tok[0]);
      pairs(l, from, [&](const std::string& r, double v) {
        CoreRow* row = row_of(l, r);
        if (!row) {
          if (section == "RANGES") src.fail(l, "range on the objective row");
          if (warnings && !objective_rhs_warned) warnings->push_back(src.name() + ": objective constant ignored");
          objective_rhs_warned = true;
          return;
        }
        if (section == "RHS")
          row->rhs = v;
        else
          row->range = v;
      });
    } else if (section == "BOUNDS") {
      const std::string type = upper(l.tok[0]);
      const bool valued = !(type == "FR" || type == "MI" || type == "PL" || type == "BV");
      std::size_t col_pos;
      if (valued) {
        if (l.tok.size() == 4) col_pos = 2;
        else if (l.tok.size() == 3) col_pos = 1;
        else src.fail(l, "bound line needs type, column and value");
      } else {
        if (l.tok.size() == 3) col_pos = 2;
        else if (l.tok.size() == 2) col_pos = 1;
        else src.fail(l, "bound line needs type and column");
      }
      const std::size_t j = col_of(l, l.tok[col_pos]);
      const double v = valued ? src.number(l, l.tok[col_pos + 1]) : 0.0;
      if (type == "UP" || type == "UI") core.upper[j] = v;
      else if (type == "LO" || type == "LI") core.lower[j] = v;
      else if (type == "FX") core.lower[j] = core.upper[j] = v;
      else if (type == "FR") core.lower[j] = -kInf, core.upper[j] = kInf;
      else if (type == "MI") core.lower[j] = -kInf;
      else if (type == "PL") core.upper[j] = kInf;
      else if (type == "BV") core.lower[j] = 0.0, core.upper[j] = 1.0;
      else src.fail(l, "unsupported bound type '" + l.tok[0] + "'", ErrorCode::UnsupportedSection);
    } else {
      src.fail(l, "data line outside a section");
    }
  }
  if (core.objective.empty()) throw Error(ErrorCode::MalformedDocument, source + ": no objective row");
  if (core.cols.empty()) throw Error(ErrorCode::MalformedDocument, source + ": no columns");
  return core;
}

// ---------------------------------------------------------------------------
// TIME

struct Periods {
  std::string name;
  std::string second_col, second_row;
  std::string first_col, first_row;
};

Periods parse_time(const std::string& text, const std::string& source) {
  const Source src(source);
  Periods p;
  std::string section;
  std::vector<Line> data;
  for (const Line& l : split_lines(text)) {
    if (l.header) {
      section = upper(l.tok[0]);
      if (section == "TIME") {
        p.name = l.tok.size() > 1 ? l.tok[1] : "";
      } else if (section == "PERIODS") {
        if (l.tok.size() > 1 && upper(l.tok[1]) == "EXPLICIT")
          src.fail(l, "explicit TIME format is not supported", ErrorCode::UnsupportedSection);
      } else if (section == "ENDATA") {
        break;
      } else {
        src.fail(l, "unsupported TIME section " + section, ErrorCode::UnsupportedSection);
      }
      continue;
    }
    if (section != "PERIODS") src.fail(l, "data line outside PERIODS");
    if (l.tok.size() != 3) src.fail(l, "period line needs column, row and period name");
    data.push_back(l);
  }
  if (data.size() != 2) {
    if (data.empty()) throw Error(ErrorCode::MalformedDocument, source + ": no periods");
    src.fail(data.back(), "exactly two periods are supported, found " + std::to_string(data.size()),
             ErrorCode::UnsupportedSection);
  }
  p.first_col = data[0].tok[0];
  p.first_row = data[0].tok[1];
  p.second_col = data[1].tok[0];
  p.second_row = data[1].tok[1];
  return p;
}

// ---------------------------------------------------------------------------
// Assembly

struct Layout {
  std::vector<std::size_t> col_stage;          // 0 or 1 per CORE column
  std::vector<std::size_t> col_pos;            // position inside its stage
  std::vector<std::size_t> row_stage;          // per CORE constraint row
  std::vector<std::vector<std::size_t>> row_pos;  // positions inside its stage (2 when ranged)
};

/// Splits a ranged row into (sense, rhs) pairs.
std::vector<std::pair<RowSense, double>> expand(const CoreRow& row) {
  const auto sense = row.type == 'L' ? RowSense::LessEqual : row.type == 'G' ? RowSense::GreaterEqual : RowSense::Equal;
  if (!row.range) return {{sense, row.rhs}};
  const double R = *row.range;
  double lo, hi;
  if (row.type == 'E') {
    lo = R >= 0 ? row.rhs : row.rhs + R;
    hi = R >= 0 ? row.rhs + R : row.rhs;
  } else if (row.type == 'L') {
    lo = row.rhs - std::abs(R);
    hi = row.rhs;
  } else {
    lo = row.rhs;
    hi = row.rhs + std::abs(R);
  }
  if (row.type == 'L') return {{RowSense::LessEqual, hi}, {RowSense::GreaterEqual, lo}};
  return {{RowSense::GreaterEqual, lo}, {RowSense::LessEqual, hi}};
}

std::string range_name(const std::string& name) { return name + "_range"; }

enum class Modifier { Replace, Add, Multiply };

struct Resolved {
  std::vector<EntryAddress> at;
  double base = 0.0;
};

struct Entry {
  std::vector<Override> overrides;
};

}  // namespace

TwoStageProblem parse_smps(const SmpsTriplet& t, std::vector<std::string>* warnings) {
  const Core core = parse_core(t.core_text, t.core_name, warnings);
  const Periods per = parse_time(t.time_text, t.time_name);

  auto find_col = [&](const std::string& name, const std::string& what) {
    auto it = core.col_index.find(name);
    if (it == core.col_index.end())
      throw Error(ErrorCode::UnknownRowOrColumn, t.time_name + ": " + what + " column '" + name + "' not in CORE");
    return it->second;
  };
  auto find_row = [&](const std::string& name, const std::string& what) -> std::size_t {
    if (name == core.objective) return 0;
    auto it = core.row_index.find(name);
    if (it == core.row_index.end())
      throw Error(ErrorCode::UnknownRowOrColumn, t.time_name + ": " + what + " row '" + name + "' not in CORE");
    return it->second;
  };
  find_col(per.first_col, "first-period");
  const std::size_t col_split = find_col(per.second_col, "second-period");
  find_row(per.first_row, "first-period");
  if (per.second_row == core.objective)
    throw Error(ErrorCode::MalformedDocument, t.time_name + ": second period cannot start at the objective row");
  const std::size_t row_split = find_row(per.second_row, "second-period");
  if (col_split == 0 || row_split == 0)
    throw Error(ErrorCode::MalformedDocument, t.time_name + ": first period is empty");

  if (warnings) {
    if (!per.name.empty() && !core.name.empty() && per.name != core.name)
      warnings->push_back("TIME name '" + per.name + "' differs from CORE name '" + core.name + "'");
  }

  Layout lay;
  const std::size_t ncol = core.cols.size();
  lay.col_stage.resize(ncol);
  lay.col_pos.resize(ncol);
  std::size_t n = 0, l = 0;
  for (std::size_t j = 0; j < ncol; ++j) {
    lay.col_stage[j] = j < col_split ? 0 : 1;
    lay.col_pos[j] = j < col_split ? n++ : l++;
  }

  TwoStageProblem p;
  p.name = core.name;
  p.c.assign(n, 0.0);
  p.base_q.assign(l, 0.0);
  for (auto [j, v] : core.cost) (lay.col_stage[j] == 0 ? p.c[lay.col_pos[j]] : p.base_q[lay.col_pos[j]]) = v;
  for (std::size_t j = 0; j < ncol; ++j) {
    if (lay.col_stage[j] == 0) {
      p.x_lower.push_back(core.lower[j]);
      p.x_upper.push_back(core.upper[j]);
      p.x_names.push_back(core.cols[j]);
    } else {
      p.y_lower.push_back(core.lower[j]);
      p.y_upper.push_back(core.upper[j]);
      p.y_names.push_back(core.cols[j]);
    }
  }
  p.W.cols = l;
  p.base_T.cols = n;

  lay.row_stage.resize(core.rows.size());
  lay.row_pos.resize(core.rows.size());
  for (std::size_t i = 0; i < core.rows.size(); ++i) {
    const CoreRow& row = core.rows[i];
    const bool second = i >= row_split;
    lay.row_stage[i] = second ? 1 : 0;
    const auto parts = expand(row);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const std::string name = k == 0 ? row.name : range_name(row.name);
      if (!second) {
        LinearRow fr;
        fr.name = name;
        fr.sense = parts[k].first;
        fr.rhs = parts[k].second;
        for (auto [j, v] : row.coef) {
          if (lay.col_stage[j] != 0)
            throw Error(ErrorCode::BadInput, t.core_name + ": first-period row '" + row.name +
                                                 "' uses second-period column '" + core.cols[j] + "'");
          fr.coefficients.index.push_back(lay.col_pos[j]);
          fr.coefficients.value.push_back(v);
        }
        lay.row_pos[i].push_back(p.first_stage_rows.size());
        p.first_stage_rows.push_back(std::move(fr));
      } else {
        SparseRow w, tr;
        for (auto [j, v] : row.coef) {
          auto& dst = lay.col_stage[j] == 0 ? tr : w;
          dst.index.push_back(lay.col_pos[j]);
          dst.value.push_back(v);
        }
        lay.row_pos[i].push_back(p.W.rows.size());
        p.W.rows.push_back(std::move(w));
        p.base_T.rows.push_back(std::move(tr));
        p.recourse_sense.push_back(parts[k].first);
        p.base_h.push_back(parts[k].second);
        p.recourse_row_names.push_back(name);
      }
    }
  }

  // STOCH
  const Source src(t.stoch_name);
  auto resolve = [&](const Line& ln, const std::string& col, const std::string& row) -> Resolved {
    Resolved r;
    const bool objective = row == core.objective;
    std::size_t ri = 0;
    if (!objective) {
      auto it = core.row_index.find(row);
      if (it == core.row_index.end()) src.fail(ln, "unknown row '" + row + "'", ErrorCode::UnknownRowOrColumn);
      ri = it->second;
      if (lay.row_stage[ri] == 0) src.fail(ln, "random data in first-period row '" + row + "'", ErrorCode::BadInput);
    }
    auto cit = core.col_index.find(col);
    if (cit == core.col_index.end()) {
      const bool is_rhs = std::find(core.rhs_sets.begin(), core.rhs_sets.end(), col) != core.rhs_sets.end() ||
                          upper(col).rfind("RHS", 0) == 0;
      if (!is_rhs) src.fail(ln, "unknown column '" + col + "'", ErrorCode::UnknownRowOrColumn);
      if (objective) src.fail(ln, "random objective constant", ErrorCode::UnsupportedSection);
      if (core.rows[ri].range) src.fail(ln, "random right-hand side on ranged row '" + row + "'", ErrorCode::UnsupportedSection);
      r.at.push_back({StochasticTarget::h, lay.row_pos[ri][0], 0});
      r.base = p.base_h[lay.row_pos[ri][0]];
      return r;
    }
    const std::size_t j = cit->second;
    if (objective) {
      if (lay.col_stage[j] == 0) src.fail(ln, "random first-period cost of '" + col + "'", ErrorCode::BadInput);
      r.at.push_back({StochasticTarget::q, 0, lay.col_pos[j]});
      r.base = p.base_q[lay.col_pos[j]];
      return r;
    }
    if (lay.col_stage[j] == 1)
      src.fail(ln, "random recourse coefficient (" + col + ", " + row + ")", ErrorCode::StochasticRecourse);
    for (std::size_t pos : lay.row_pos[ri]) r.at.push_back({StochasticTarget::T, pos, lay.col_pos[j]});
    r.base = p.base_T.rows[lay.row_pos[ri][0]].at(lay.col_pos[j]);
    return r;
  };
  auto apply = [](Modifier m, double base, double v) {
    return m == Modifier::Add ? base + v : m == Modifier::Multiply ? base * v : v;
  };
  auto overrides_of = [](const Resolved& r, double v) {
    std::vector<Override> out;
    for (const auto& a : r.at) out.push_back({a, v});
    return out;
  };

  // Every random group is collected as a block; plain INDEP groups with a
  // single address become marginals at the end.
  struct Group {
    std::string key;
    bool indep = false;
    std::vector<EntryAddress> at;  // indep only
    std::vector<double> values;    // indep only
    DiscreteBlock block;
  };
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> group_index;
  std::string section;
  Modifier mod = Modifier::Replace;
  std::string stoch_name;
  Group* current_block = nullptr;
  // per block: address order and first-realization values
  std::unordered_map<std::string, std::vector<Override>> block_first;
  bool first_realization = false;

  for (const Line& ln : split_lines(t.stoch_text)) {
    if (ln.header) {
      section = upper(ln.tok[0]);
      current_block = nullptr;
      if (section == "STOCH") {
        stoch_name = ln.tok.size() > 1 ? ln.tok[1] : "";
        continue;
      }
      if (section == "ENDATA") break;
      if (section != "INDEP" && section != "BLOCKS")
        src.fail(ln, "unsupported STOCH section " + section, ErrorCode::UnsupportedSection);
      const std::string dist = ln.tok.size() > 1 ? upper(ln.tok[1]) : "DISCRETE";
      if (dist != "DISCRETE") src.fail(ln, section + " " + dist + " is not supported", ErrorCode::UnsupportedSection);
      const std::string m = ln.tok.size() > 2 ? upper(ln.tok[2]) : "REPLACE";
      if (m == "REPLACE") mod = Modifier::Replace;
      else if (m == "ADD") mod = Modifier::Add;
      else if (m == "MULTIPLY") mod = Modifier::Multiply;
      else src.fail(ln, "unknown modifier " + m, ErrorCode::UnsupportedSection);
      continue;
    }
    if (section == "INDEP") {
      if (ln.tok.size() != 5 && ln.tok.size() != 4) src.fail(ln, "INDEP line needs column, row, value, period, probability");
      const Resolved r = resolve(ln, ln.tok[0], ln.tok[1]);
      const double v = apply(mod, r.base, src.number(ln, ln.tok[2]));
      const double prob = src.number(ln, ln.tok.back());
      if (prob < 0.0) src.fail(ln, "negative probability", ErrorCode::BadProbabilities);
      const std::string key = "I\x1f" + ln.tok[0] + "\x1f" + ln.tok[1];
      auto it = group_index.find(key);
      if (it == group_index.end()) {
        it = group_index.emplace(key, groups.size()).first;
        Group g;
        g.key = key;
        g.indep = true;
        g.at = r.at;
        g.block.name = ln.tok[0] + ":" + ln.tok[1];
        groups.push_back(std::move(g));
      }
      Group& g = groups[it->second];
      g.values.push_back(v);
      g.block.realizations.push_back({prob, overrides_of(r, v)});
    } else if (section == "BLOCKS") {
      if (upper(ln.tok[0]) == "BL") {
        if (ln.tok.size() != 4 && ln.tok.size() != 3) src.fail(ln, "BL line needs block name, period, probability");
        const double prob = src.number(ln, ln.tok.back());
        if (prob < 0.0) src.fail(ln, "negative probability", ErrorCode::BadProbabilities);
        const std::string key = "B\x1f" + ln.tok[1];
        auto it = group_index.find(key);
        first_realization = it == group_index.end();
        if (first_realization) {
          it = group_index.emplace(key, groups.size()).first;
          Group g;
          g.key = key;
          g.block.name = ln.tok[1];
          groups.push_back(std::move(g));
        }
        current_block = &groups[it->second];
        BlockRealization real;
        real.probability = prob;
        if (!first_realization) real.overrides = block_first[key];
        current_block->block.realizations.push_back(std::move(real));
        continue;
      }
      if (!current_block) src.fail(ln, "block entry before any BL line");
      if (ln.tok.size() != 3) src.fail(ln, "block entry needs column, row and value");
      const Resolved r = resolve(ln, ln.tok[0], ln.tok[1]);
      const double v = apply(mod, r.base, src.number(ln, ln.tok[2]));
      auto& real = current_block->block.realizations.back();
      auto& first = block_first[current_block->key];
      for (const auto& a : r.at) {
        auto hit = std::find_if(real.overrides.begin(), real.overrides.end(), [&](const Override& o) { return o.at == a; });
        if (hit != real.overrides.end()) {
          hit->value = v;
        } else {
          if (!first_realization) src.fail(ln, "entry not present in the first realization of block " + current_block->block.name);
          real.overrides.push_back({a, v});
        }
        if (first_realization) {
          auto fit = std::find_if(first.begin(), first.end(), [&](const Override& o) { return o.at == a; });
          if (fit != first.end()) fit->value = v;
          else first.push_back({a, v});
        }
      }
    } else {
      src.fail(ln, "data line outside a section");
    }
  }
  if (warnings && !stoch_name.empty() && !core.name.empty() && stoch_name != core.name)
    warnings->push_back("STOCH name '" + stoch_name + "' differs from CORE name '" + core.name + "'");

  if (groups.empty()) {
    p.distribution = FiniteList{{Scenario{}}};
  } else if (std::all_of(groups.begin(), groups.end(), [](const Group& g) { return g.indep && g.at.size() == 1; })) {
    IndependentDiscrete ind;
    for (const auto& g : groups) {
      DiscreteMarginal m;
      m.at = g.at[0];
      m.values = g.values;
      for (const auto& real : g.block.realizations) m.probabilities.push_back(real.probability);
      ind.marginals.push_back(std::move(m));
    }
    p.distribution = std::move(ind);
  } else {
    BlockDiscrete bd;
    for (auto& g : groups) bd.blocks.push_back(std::move(g.block));
    p.distribution = std::move(bd);
  }

  validate(p);
  return p;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SmpsTriplet read_smps_files(const std::filesystem::path& core, const std::filesystem::path& time,
                            const std::filesystem::path& stoch) {
  SmpsTriplet t;
  t.core_text = slurp(core);
  t.time_text = slurp(time);
  t.stoch_text = slurp(stoch);
  t.core_name = core.filename().string();
  t.time_name = time.filename().string();
  t.stoch_name = stoch.filename().string();
  return t;
}

SmpsTriplet find_smps_triplet(const std::filesystem::path& dir, const std::string& stem) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  std::map<std::string, std::array<fs::path, 3>> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = upper(e.path().extension().string());
    int slot = -1;
    if (ext == ".COR" || ext == ".CORE" || ext == ".MPS") slot = 0;
    else if (ext == ".TIM" || ext == ".TIME") slot = 1;
    else if (ext == ".STO" || ext == ".STOCH") slot = 2;
    if (slot < 0) continue;
    found[e.path().stem().string()][static_cast<std::size_t>(slot)] = e.path();
  }
  std::vector<std::string> complete;
  for (const auto& [name, files] : found)
    if (!files[0].empty() && !files[1].empty() && !files[2].empty()) complete.push_back(name);
  std::string pick;
  if (!stem.empty()) {
    for (const auto& c : complete)
      if (upper(c) == upper(stem)) pick = c;
    if (pick.empty()) throw Error(ErrorCode::Io, "no SMPS triplet named '" + stem + "' in " + dir.string());
  } else {
    if (complete.size() != 1)
      throw Error(ErrorCode::Io, std::to_string(complete.size()) + " SMPS triplets in " + dir.string() + ", expected one");
    pick = complete[0];
  }
  const auto& f = found[pick];
  return read_smps_files(f[0], f[1], f[2]);
}

}  // namespace tslp
