#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "tslp/error.hpp"
#include "tslp/lp.hpp"
#include "tslp/lshaped.hpp"
#include "tslp/oracle.hpp"
#include "tslp/smps.hpp"

using namespace tslp;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const std::filesystem::path kData = TSLP_TEST_DATA;

SmpsTriplet capexp() { return find_smps_triplet(kData, "capexp"); }

SmpsTriplet with_stoch(std::string stoch) {
  auto t = capexp();
  t.stoch_text = std::move(stoch);
  return t;
}

const char* kCore = R"(NAME small
ROWS
 N obj
 L budget
 G need
 E bal
COLUMNS
    x1 obj 1.0 budget 1.0
    x1 need 1.0
    x2 obj 2.0 budget 1.0
    y1 obj 3.0 need 1.0
    y1 bal 1.0
    y2 obj 1.0 bal 1.0
RHS
    rhs budget 10.0 need 2.0
    rhs bal 4.0
BOUNDS
 UP bnd x1 8.0
 FR bnd y2
ENDATA
)";
const char* kTime = R"(TIME small
PERIODS IMPLICIT
    x1 budget first
    y1 need second
ENDATA
)";

}  // namespace

TEST_CASE("capacity expansion triplet dimensions") {
  std::vector<std::string> warnings;
  const auto p = parse_smps(capexp(), &warnings);
  CHECK(warnings.empty());
  CHECK(p.name == "CAPEXP");
  CHECK(p.n() == 4);
  CHECK(p.m() == 2);
  CHECK(p.l() == 12);
  CHECK(p.r() == 7);
  CHECK(joint_scenario_count(p.distribution) == 12.0);
  REQUIRE(std::holds_alternative<IndependentDiscrete>(p.distribution));
  const auto& ind = std::get<IndependentDiscrete>(p.distribution);
  REQUIRE(ind.marginals.size() == 3);
  CHECK(ind.marginals[0].at == EntryAddress{StochasticTarget::h, 4, 0});
  CHECK(ind.marginals[0].values == std::vector<double>{3.0, 5.0, 7.0});
  CHECK(p.c == Vector{10.0, 7.0, 16.0, 6.0});
  CHECK(p.base_q[8] == 3.2);
  CHECK(p.first_stage_rows[0].sense == RowSense::GreaterEqual);
  CHECK(p.first_stage_rows[1].rhs == 120.0);
  CHECK(p.base_T.rows[0].at(0) == -1.0);
  CHECK(p.W.rows[0].at(0) == 1.0);
  CHECK(p.W.rows[4].at(3) == 1.0);
  CHECK(p.recourse_sense[4] == RowSense::GreaterEqual);
  CHECK(p.y_names[11] == "Y43");

  // extensive form and exhaustive evaluation agree at its optimum
  const auto sol = solve_lp(build_extensive_form(p, enumerate_scenarios(p.distribution)));
  REQUIRE(sol.status == LpStatus::Optimal);
  const Vector x(sol.x.begin(), sol.x.begin() + 4);
  CHECK(estimate(p, full_scenario_set(p.distribution), x).value == doctest::Approx(sol.objective).epsilon(1e-9));
}

TEST_CASE("stage split is a partition and bounds parse") {
  SmpsTriplet t{kCore, kTime, "STOCH small\nENDATA\n"};
  const auto p = parse_smps(t);
  CHECK(p.n() == 2);
  CHECK(p.l() == 2);
  CHECK(p.m() == 1);
  CHECK(p.r() == 2);
  CHECK(p.x_upper[0] == 8.0);
  CHECK(p.x_upper[1] == kInf);
  CHECK(p.y_lower[1] == -kInf);
  CHECK(p.base_T.rows[0].at(0) == 1.0);
  CHECK(p.recourse_sense[1] == RowSense::Equal);
  // empty STOCH body: one scenario with weight 1
  REQUIRE(std::holds_alternative<FiniteList>(p.distribution));
  const auto& fl = std::get<FiniteList>(p.distribution);
  REQUIRE(fl.scenarios.size() == 1);
  CHECK(fl.scenarios[0].weight == 1.0);
  CHECK(fl.scenarios[0].overrides.empty());
}

TEST_CASE("whitespace and blank lines do not matter") {
  std::string core = kCore;
  std::string spaced;
  for (char ch : core) {
    spaced += ch;
    if (ch == '\n') spaced += "   \n\n";
  }
  for (auto pos = spaced.find(" 1.0"); pos != std::string::npos; pos = spaced.find(" 1.0", pos + 6))
    spaced.replace(pos, 1, " \t ");
  SmpsTriplet a{kCore, kTime, ""}, b{spaced, std::string(kTime) + "\n\n", "* comment only\n"};
  CHECK(parse_smps(a) == parse_smps(b));
}

TEST_CASE("ranged rows become two rows") {
  std::string core = kCore;
  core.replace(core.find("BOUNDS"), 0, "RANGES\n    rng need 3.0 bal -1.0\n");
  SmpsTriplet t{core, kTime, ""};
  const auto p = parse_smps(t);
  REQUIRE(p.r() == 4);
  CHECK(p.recourse_row_names == std::vector<std::string>{"need", "need_range", "bal", "bal_range"});
  CHECK(p.recourse_sense[0] == RowSense::GreaterEqual);
  CHECK(p.base_h[0] == 2.0);
  CHECK(p.recourse_sense[1] == RowSense::LessEqual);
  CHECK(p.base_h[1] == 5.0);
  CHECK(p.recourse_sense[2] == RowSense::GreaterEqual);
  CHECK(p.base_h[2] == 3.0);
  CHECK(p.recourse_sense[3] == RowSense::LessEqual);
  CHECK(p.base_h[3] == 4.0);
  CHECK(p.base_T.rows[1] == p.base_T.rows[0]);
  CHECK(p.W.rows[1] == p.W.rows[0]);

  // a random T entry on a ranged row moves both copies together
  t.stoch_text = "STOCH small\nINDEP DISCRETE\n    x1 need 2.0 second 0.5\n    x1 need 3.0 second 0.5\nENDATA\n";
  const auto q = parse_smps(t);
  REQUIRE(std::holds_alternative<BlockDiscrete>(q.distribution));
  const auto& blk = std::get<BlockDiscrete>(q.distribution).blocks.at(0);
  CHECK(blk.realizations[1].overrides.size() == 2);
  CHECK(blk.realizations[1].overrides[1].at == EntryAddress{StochasticTarget::T, 1, 0});
  CHECK(blk.realizations[1].overrides[1].value == 3.0);

  t.stoch_text = "STOCH small\nINDEP DISCRETE\n    rhs need 2.0 second 1.0\nENDATA\n";
  CHECK(code_of([&] { parse_smps(t); }) == ErrorCode::UnsupportedSection);
}

TEST_CASE("blocks and modifiers") {
  SmpsTriplet t{kCore, kTime, R"(STOCH small
BLOCKS DISCRETE
 BL B1 second 0.25
    rhs need 1.0
    y1 obj 5.0
 BL B1 second 0.75
    y1 obj 6.0
INDEP DISCRETE ADD
    x1 bal 1.0 second 0.5
    x1 bal 2.0 second 0.5
ENDATA
)"};
  const auto p = parse_smps(t);
  REQUIRE(std::holds_alternative<BlockDiscrete>(p.distribution));
  const auto& bd = std::get<BlockDiscrete>(p.distribution);
  REQUIRE(bd.blocks.size() == 2);
  const auto& b1 = bd.blocks[0];
  CHECK(b1.name == "B1");
  REQUIRE(b1.realizations.size() == 2);
  CHECK(b1.realizations[0].overrides.size() == 2);
  // later realizations inherit entries they do not list
  CHECK(b1.realizations[1].overrides[0].value == 1.0);
  CHECK(b1.realizations[1].overrides[1].value == 6.0);
  CHECK(b1.realizations[1].overrides[1].at == EntryAddress{StochasticTarget::q, 0, 0});
  // ADD on a zero base coefficient
  CHECK(bd.blocks[1].realizations[1].overrides[0].value == 2.0);
  CHECK(joint_scenario_count(p.distribution) == 4.0);
}

TEST_CASE("parser errors") {
  CHECK(code_of([] { parse_smps(with_stoch("STOCH CAPEXP\nINDEP DISCRETE\n    Y11 CAP1 2.0 STAGE2 1.0\nENDATA\n")); }) ==
        ErrorCode::StochasticRecourse);
  CHECK(code_of([] { parse_smps(with_stoch("STOCH CAPEXP\nSCENARIOS DISCRETE\nENDATA\n")); }) ==
        ErrorCode::UnsupportedSection);
  CHECK(code_of([] { parse_smps(with_stoch("STOCH CAPEXP\nINDEP NORMAL\nENDATA\n")); }) ==
        ErrorCode::UnsupportedSection);
  CHECK(code_of([] { parse_smps(with_stoch("STOCH CAPEXP\nINDEP DISCRETE\n    RHS NOPE 1.0 STAGE2 1.0\nENDATA\n")); }) ==
        ErrorCode::UnknownRowOrColumn);
  CHECK(code_of([] { parse_smps(with_stoch("STOCH CAPEXP\nINDEP DISCRETE\n    RHS DEM1 1.0 STAGE2 -0.5\nENDATA\n")); }) ==
        ErrorCode::BadProbabilities);
  CHECK(code_of([] { parse_smps(with_stoch("STOCH CAPEXP\nINDEP DISCRETE\n    RHS DEM1 1.0 STAGE2 0.5\nENDATA\n")); }) ==
        ErrorCode::BadProbabilities);
  CHECK(code_of([] { parse_smps(with_stoch("STOCH CAPEXP\nINDEP DISCRETE\n    RHS MINCAP 1.0 STAGE2 1.0\nENDATA\n")); }) ==
        ErrorCode::BadInput);

  const std::string msg =
      message_of([] { parse_smps(with_stoch("STOCH CAPEXP\nINDEP DISCRETE\n\n    RHS DEM1 abc STAGE2 1.0\nENDATA\n")); });
  CHECK(msg.find("capexp.sto:4") != std::string::npos);
  CHECK(code_of([] { parse_smps(with_stoch("STOCH CAPEXP\nINDEP DISCRETE\n    RHS DEM1 abc STAGE2 1.0\n")); }) ==
        ErrorCode::MalformedLine);

  auto t = capexp();
  t.core_text.replace(t.core_text.find(" N  COST"), 8, " N  COST\n N  COST2");
  CHECK(code_of([&] { parse_smps(t); }) == ErrorCode::UnsupportedSection);

  t = capexp();
  t.time_text = "TIME CAPEXP\nPERIODS\n    X1 MINCAP S1\n    Y11 CAP1 S2\n    Y21 CAP2 S3\nENDATA\n";
  CHECK(code_of([&] { parse_smps(t); }) == ErrorCode::UnsupportedSection);
  t.time_text = "TIME CAPEXP\nPERIODS\n    X1 MINCAP S1\n    Z9 CAP1 S2\nENDATA\n";
  CHECK(code_of([&] { parse_smps(t); }) == ErrorCode::UnknownRowOrColumn);

  CHECK(code_of([] { find_smps_triplet(kData, "missing"); }) == ErrorCode::Io);
}

TEST_CASE("name mismatch is a warning") {
  auto t = capexp();
  t.time_text.replace(t.time_text.find("CAPEXP"), 6, "OTHER");
  std::vector<std::string> warnings;
  CHECK_NOTHROW(parse_smps(t, &warnings));
  CHECK(warnings.size() == 1);
}

TEST_CASE("native round trip") {
  std::vector<TwoStageProblem> ps;
  ps.push_back(tiny_inventory());
  ps.push_back(tiny_inventory_deterministic());
  ps.push_back(parse_smps(capexp()));
  ps.push_back(gen_inventory_random(3, 7, 2));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomInstanceParams rp;
    rp.n = seed;
    rp.seed = seed;
    ps.push_back(gen_random(rp));
  }
  SmpsTriplet blocks{kCore, kTime,
                     "STOCH small\nBLOCKS DISCRETE\n BL B second 0.5\n    rhs need 1.0\n BL B second 0.5\n    rhs need 0.1\nENDATA\n"};
  ps.push_back(parse_smps(blocks));
  for (const auto& p : ps) {
    CAPTURE(p.name);
    const std::string text = write_native(p);
    const auto back = parse_native(text);
    CHECK(back == p);
    CHECK(write_native(back) == text);
  }
}

TEST_CASE("native document errors") {
  const std::string text = write_native(tiny_inventory());
  CHECK(code_of([&] { parse_native(text.substr(0, text.size() / 2)); }) == ErrorCode::MalformedDocument);
  std::string extra = text;
  extra.replace(extra.find("\"name\""), 6, "\"bogus\": 1, \"name\"");
  CHECK(code_of([&] { parse_native(extra); }) == ErrorCode::MalformedDocument);
  std::string neg = text;
  neg.replace(neg.find("\"cols\": 1"), 9, "\"cols\": -1");
  CHECK(code_of([&] { parse_native(neg); }) == ErrorCode::MalformedDocument);
  CHECK(code_of([] { parse_native("[]"); }) == ErrorCode::MalformedDocument);
  CHECK(code_of([] { load_native("/nonexistent/file.json"); }) == ErrorCode::Io);

  const auto dir = std::filesystem::temp_directory_path() / "tslp_native_test";
  std::filesystem::create_directories(dir);
  save_native(tiny_inventory(), dir / "tiny.json");
  CHECK(load_native(dir / "tiny.json") == tiny_inventory());
  std::filesystem::remove_all(dir);
}

TEST_CASE("exact solve of the parsed triplet matches the extensive form") {
  const auto p = parse_smps(capexp());
  const auto ef = solve_lp(build_extensive_form(p, enumerate_scenarios(p.distribution)));
  REQUIRE(ef.status == LpStatus::Optimal);
  // several of these runs pass through degenerate vertices with dependent active cuts
  for (double rho : {0.01, 0.1, 1.0, 10.0}) {
    SolverConfig c;
    c.exact_oracle = true;
    c.policy = ConstantPolicy{rho};
    c.max_total_inner = 20000;
    c.max_outer = 5000;
    const auto r = run(p, c);
    INFO("rho = " << rho);
    CHECK(r.best_value == doctest::Approx(ef.objective).epsilon(1e-6));
  }
}
