#pragma once

#include <hbe/construction.hpp>
#include <hbe/kernels.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hbe::cli {

// Raw key=value settings; later sources override earlier ones.
using Settings = std::map<std::string, std::string>;

// Parses a config file: key = value per line, '#' starts a comment.
Settings read_config_file(const std::string& path);

struct RunConfig {
  KernelSpec kernel;
  std::string method;  // empty: the HBE method matching the kernel
  double eps = 0.5;
  double tau = 1e-3;
  double chi = 0.1;
  double alpha = 1.0;
  double beta = 0.5;
  double t = 1.0;
  int p = 2;
  int q = 1;
  std::uint64_t seed = 1;

  std::string data;
  std::string format = "csv";
  std::string queries;
  std::string query_format;  // defaults to format
  std::string index;
  std::string output;
  std::string vector;
  std::string vector_format = "csv";
  std::string oracle;
  std::string report;
  std::optional<double> R;
  std::uint64_t tables = 0;  // 0: derived from eps, tau, chi
  double C_N = 1.0;
  std::string estimator = "kde";  // kde or amr
  std::vector<std::string> methods;  // bench
  std::size_t instances = 10000;     // verify
  std::size_t crossover = 64;        // kmvm
  bool timing = true;                // bench

  ConstructionParams construction_params() const { return {beta, t, p, q}; }
  bool is_hbe() const { return method.rfind("hbe-", 0) == 0; }
};

// Every known key; used for the command line flags and for validation.
const std::vector<std::string>& config_keys();

// Builds and validates a RunConfig. Violations raise ConfigError naming the owning result.
RunConfig make_run_config(const Settings& settings);

// Checks that a method is usable with a kernel.
void check_method_kernel(const std::string& method, const KernelSpec& kernel, int p);

// Settings form of a config, in key order (used in manifests).
Settings to_settings(const RunConfig& cfg);

} // namespace hbe::cli
