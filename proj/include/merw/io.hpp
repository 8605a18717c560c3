// Output plumbing: CSV tables, JSON documents, atomic file writes and the
// SHA-256 manifest of everything a run produced.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "merw/coupling.hpp"
#include "merw/walk.hpp"

namespace merw {

using json = nlohmann::ordered_json;

/// Shortest decimal that round-trips to the same double; "nan", "inf", "-inf".
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  /// Header line, one line per row, trailing newline.
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

template <class T>
std::string cell(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(static_cast<double>(v));
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else {
    return std::string(v);
  }
}

std::string sha256_hex(std::string_view data);

/// Writes to `path.tmp` and renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Collects named outputs. With a root directory every file is written
/// atomically; without one the files stay in memory. The manifest lists
/// every file in name order with its digest and size.
class OutputSet {
 public:
  explicit OutputSet(std::optional<std::filesystem::path> root = std::nullopt);

  void add(const std::string& name, std::string content);
  void add_json(const std::string& name, const json& doc);
  void add_csv(const std::string& name, const CsvTable& table);

  std::string manifest() const;
  /// Writes manifest.json (only meaningful with a root).
  void write_manifest() const;

  const std::map<std::string, std::string>& files() const { return files_; }
  const std::optional<std::filesystem::path>& root() const { return root_; }

 private:
  std::optional<std::filesystem::path> root_;
  std::map<std::string, std::string> files_;  ///< name -> content
};

json verdict(std::string_view statistic, std::string_view regime, bool pass, json details);

json to_json(const WalkParams& params);
json to_json(const WalkState& state);

/// `n,x1,...,xd` CSV of the recorded positions.
CsvTable trajectory_csv(const Trajectory& t);
json trajectory_sidecar(const Trajectory& t);

CsvTable b_counts_csv(const CouplingBundle& bundle);
json to_json(const DominanceReport& report);

}  // namespace merw
