#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tslp/instance.hpp"

namespace tslp {

/// Raw contents of a CORE/TIME/STOCH triplet plus names used in messages.
struct SmpsTriplet {
  std::string core_text;
  std::string time_text;
  std::string stoch_text;
  std::string core_name = "core";
  std::string time_name = "time";
  std::string stoch_name = "stoch";
};

/// Parses a two-period SMPS triplet. CORE is free-format MPS (ROWS, COLUMNS,
/// RHS, optional RANGES and BOUNDS); TIME uses implicit PERIODS; STOCH may
/// hold INDEP DISCRETE and BLOCKS DISCRETE sections with REPLACE, ADD or
/// MULTIPLY. Ranged rows become two rows. Mismatched NAME records are
/// reported through `warnings` when given.
///
/// Throws UnsupportedSection, StochasticRecourse, UnknownRowOrColumn,
/// MalformedLine (with file name and line number), BadInput, and whatever
/// validate() throws.
TwoStageProblem parse_smps(const SmpsTriplet& triplet, std::vector<std::string>* warnings = nullptr);

/// Reads the three files. Throws Io.
SmpsTriplet read_smps_files(const std::filesystem::path& core, const std::filesystem::path& time,
                            const std::filesystem::path& stoch);

/// Finds `<stem>.cor|.core`, `.tim|.time` and `.sto|.stoch` next to each
/// other. With an empty stem the directory must hold exactly one triplet.
/// Throws Io.
SmpsTriplet find_smps_triplet(const std::filesystem::path& dir, const std::string& stem = "");

/// Native JSON document with keys first_stage, recourse, stochastic and
/// distribution (see docs/native-format.md). Infinite values are written as
/// the strings "inf" and "-inf".
std::string write_native(const TwoStageProblem& problem);

/// Inverse of write_native; unknown keys are rejected. Throws
/// MalformedDocument, then check_structure errors.
TwoStageProblem parse_native(const std::string& text);

/// File helpers. Throw Io besides the parse errors.
TwoStageProblem load_native(const std::filesystem::path& path);
void save_native(const TwoStageProblem& problem, const std::filesystem::path& path);

}  // namespace tslp
