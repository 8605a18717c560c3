// Acceptance suite: fourteen end-to-end checks at desk scale. Each check
// writes its data and a JSON verdict into an OutputSet and reports a single
// pass/fail line.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "merw/io.hpp"

namespace merw {

struct CriterionInfo {
  int id = 0;
  std::string_view name;
  std::string_view title;
};

const std::vector<CriterionInfo>& acceptance_criteria();

/// Comma-separated names or ids; empty selects everything. Throws
/// ValidationError on an unknown token.
std::vector<int> select_criteria(std::string_view filter);

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  int workers = 1;
  std::string filter;
  std::optional<std::filesystem::path> out;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  json details;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool pass() const;
  /// One line per criterion plus a totals line. Depends only on the results.
  std::string summary_text() const;
};

std::string format_result_line(const CriterionResult& r);

/// Runs the selected criteria in id order. `progress`, when given, receives
/// each result line as soon as it is known (with wall time).
AcceptanceReport run_acceptance(const AcceptanceOptions& opt, std::ostream* progress = nullptr);

/// Runs one criterion into `out` (files are prefixed by the criterion name).
CriterionResult run_criterion(int id, std::uint64_t seed, int workers, OutputSet& out);

}  // namespace merw
