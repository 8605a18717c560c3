// merw_lab command-line front end.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "merw/io.hpp"

namespace merw {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidConfig = 1,
  kExitRuntime = 2,
  kExitCheckFailed = 3,
};

/// Effective configuration of one run: the JSON config file with command-line
/// flags layered on top. Together with the build it fixes every output byte.
struct ExperimentConfig {
  std::string command;  ///< simulate | couple | urn | limit | stats | verify
  std::string method;   ///< limit method or stats kind
  int d = 1;
  std::string p = "1/2";
  std::vector<std::string> q;
  std::int64_t n = 1000;
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  std::int64_t stride = 1;
  int workers = 1;
  std::optional<std::string> out;
  bool assert_checks = false;
  std::string filter;
  int order = 20;
  std::vector<std::int64_t> checkpoints;  ///< empty: 1,2,5,10,... up to n
  std::vector<std::int64_t> radii{5, 10, 20};
  double nu = 0.1;
  double radius = 50.0;
  std::int64_t n_lo = 0;  ///< 0: n/10
  double x_max = 50.0;
  double step = 0.01;
  double lo = -10.0;
  double hi = 10.0;
  double dx = 0.01;

  json to_json() const;
};

/// Builds the configuration from a JSON document (keys as in to_json()).
/// Throws ValidationError on unknown keys or ill-typed values.
ExperimentConfig config_from_json(const json& doc, ExperimentConfig base = {});

/// Runs one configured experiment. Files go to cfg.out (default
/// "merw_lab_out"); verify only writes files when an output directory is set.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (flags, optional --config file) and runs. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace merw
