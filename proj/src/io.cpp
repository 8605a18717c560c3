#include "merw/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "merw/errors.hpp"

namespace merw {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ValidationError("CSV row width differs from header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

OutputSet::OutputSet(std::optional<fs::path> root) : root_(std::move(root)) {}

void OutputSet::add(const std::string& name, std::string content) {
  if (root_) write_atomic(*root_ / name, content);
  files_[name] = std::move(content);
}

void OutputSet::add_json(const std::string& name, const json& doc) { add(name, doc.dump(2) + "\n"); }

void OutputSet::add_csv(const std::string& name, const CsvTable& table) { add(name, table.str()); }

std::string OutputSet::manifest() const {
  json files = json::array();
  for (const auto& [name, content] : files_) {
    files.push_back({{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }
  return json{{"files", files}}.dump(2) + "\n";
}

void OutputSet::write_manifest() const {
  if (root_) write_atomic(*root_ / "manifest.json", manifest());
}

json verdict(std::string_view statistic, std::string_view regime, bool pass, json details) {
  return json{{"statistic", statistic}, {"regime", regime}, {"pass", pass}, {"details", std::move(details)}};
}

json to_json(const WalkParams& params) {
  json j{{"d", params.d}, {"p", params.p.to_string()}};
  if (params.q) j["q"] = params.q->to_string();
  j["initial_step"] = params.initial_step;
  return j;
}

json to_json(const WalkState& s) {
  return json{{"n", s.n},
              {"position", s.position},
              {"dir_counts", s.dir_counts},
              {"axis_counts", s.axis_counts}};
}

CsvTable trajectory_csv(const Trajectory& t) {
  std::vector<std::string> header{"n"};
  for (int i = 1; i <= t.params.d; ++i) header.push_back("x" + std::to_string(i));
  CsvTable table(header);
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    std::vector<std::string> row{cell(t.times[k])};
    for (auto x : t.position(k)) row.push_back(cell(x));
    table.row(std::move(row));
  }
  return table;
}

json trajectory_sidecar(const Trajectory& t) {
  return json{{"params", to_json(t.params)},
              {"seed", t.seed},
              {"stream_id", t.stream_id},
              {"n_max", t.n_max},
              {"stride", t.stride},
              {"final_state", to_json(t.final_state)}};
}

CsvTable b_counts_csv(const CouplingBundle& bundle) {
  const auto d = static_cast<std::size_t>(bundle.params.d);
  std::vector<std::string> header{"n"};
  for (std::size_t i = 1; i <= d; ++i) header.push_back("b" + std::to_string(i));
  CsvTable table(header);
  for (std::size_t k = 0; k * d < bundle.b_counts.size(); ++k) {
    std::vector<std::string> row{cell(static_cast<std::int64_t>(k + 1))};
    for (std::size_t i = 0; i < d; ++i) row.push_back(cell(bundle.b_counts[k * d + i]));
    table.row(std::move(row));
  }
  return table;
}

json to_json(const DominanceReport& report) {
  json v = json::array();
  for (const auto& x : report.violations) {
    v.push_back({{"n", x.n}, {"axis", x.axis}, {"values", x.values}});
  }
  return json{{"regime", to_string(report.regime)},
              {"violations", v},
              {"violation_count", report.violation_count},
              {"verified_range", {report.range_begin, report.range_end}}};
}

}  // namespace merw
