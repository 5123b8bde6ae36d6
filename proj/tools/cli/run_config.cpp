#include "cli/run_config.hpp"

#include <hbe/dataset_io.hpp>
#include <hbe/error.hpp>
#include <hbe/kmvm.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hbe::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("'" + key + "' must be a finite real number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' must be a nonnegative integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  std::uint64_t u = to_uint(key, v);
  if (u > 1000000) throw ConfigError("'" + key + "' is too large");
  return static_cast<int>(u);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("'" + key + "' must be a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::vector<std::string> kMethods = {"hbe-exp", "hbe-student", "hbe-gauss-euclid", "hbe-gauss-ball", "rs", "rff"};

void check_method_name(const std::string& m) {
  if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
    throw ConfigError("unknown method '" + m +
                      "' (expected hbe-exp, hbe-student, hbe-gauss-euclid, hbe-gauss-ball, rs or rff)");
}

std::string fmt(double v) { return format_double(v); }

} // namespace

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Settings s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    s[key] = value;
  }
  return s;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "kernel", "bandwidth", "method",   "eps",       "tau",       "chi",    "alpha",   "beta",
      "t",      "p",         "q",        "seed",      "data",      "format", "queries", "query_format",
      "index",  "output",    "vector",   "vector_format", "oracle", "report", "R",       "tables",
      "c_n",    "estimator", "methods",  "instances", "crossover", "timing"};
  return keys;
}

void check_method_kernel(const std::string& method, const KernelSpec& kernel, int p) {
  auto mismatch = [&](const std::string& need, const std::string& result) {
    throw ConfigError("method '" + method + "' requires the " + need + " kernel (" + result + "), got " +
                      to_string(kernel.kind));
  };
  if (method == "hbe-exp" && kernel.kind != KernelKind::Exponential)
    mismatch("exponential", "exponential kernel HBE theorem");
  if (method == "hbe-student") {
    if (kernel.kind != KernelKind::TStudent) mismatch("student", "t-Student HBE theorem");
    if (kernel.p != p) throw ConfigError("hbe-student uses the kernel exponent p; kernel and method disagree");
  }
  if ((method == "hbe-gauss-euclid" || method == "hbe-gauss-ball") && kernel.kind != KernelKind::Gaussian)
    mismatch("gaussian", "Gaussian kernel HBE theorems");
  if (method == "rff" && kernel.kind != KernelKind::Gaussian)
    mismatch("gaussian", "random Fourier features are defined for the Gaussian kernel");
}

RunConfig make_run_config(const Settings& s) {
  RunConfig c;
  for (const auto& [key, value] : s) {
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key '" + key + "'");
    (void)value;
  }
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = s.find(key);
    return it == s.end() ? nullptr : &it->second;
  };
  if (auto v = get("kernel")) {
    try {
      c.kernel.kind = parse_kernel_kind(*v);
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto v = get("bandwidth")) c.kernel.bandwidth = to_double("bandwidth", *v);
  if (auto v = get("method")) c.method = *v;
  if (auto v = get("eps")) c.eps = to_double("eps", *v);
  if (auto v = get("tau")) c.tau = to_double("tau", *v);
  if (auto v = get("chi")) c.chi = to_double("chi", *v);
  if (auto v = get("alpha")) c.alpha = to_double("alpha", *v);
  if (auto v = get("beta")) c.beta = to_double("beta", *v);
  if (auto v = get("t")) c.t = to_double("t", *v);
  if (auto v = get("p")) c.p = to_int("p", *v);
  if (auto v = get("q")) c.q = to_int("q", *v);
  if (auto v = get("seed")) c.seed = to_uint("seed", *v);
  if (auto v = get("data")) c.data = *v;
  if (auto v = get("format")) c.format = *v;
  if (auto v = get("queries")) c.queries = *v;
  if (auto v = get("query_format")) c.query_format = *v;
  if (auto v = get("index")) c.index = *v;
  if (auto v = get("output")) c.output = *v;
  if (auto v = get("vector")) c.vector = *v;
  if (auto v = get("vector_format")) c.vector_format = *v;
  if (auto v = get("oracle")) c.oracle = *v;
  if (auto v = get("report")) c.report = *v;
  if (auto v = get("R")) c.R = to_double("R", *v);
  if (auto v = get("tables")) c.tables = to_uint("tables", *v);
  if (auto v = get("c_n")) c.C_N = to_double("c_n", *v);
  if (auto v = get("estimator")) c.estimator = *v;
  if (auto v = get("methods")) c.methods = split_list(*v);
  if (auto v = get("instances")) c.instances = to_uint("instances", *v);
  if (auto v = get("crossover")) c.crossover = to_uint("crossover", *v);
  if (auto v = get("timing")) c.timing = to_bool("timing", *v);
  c.kernel.p = c.p;
  if (c.method.empty()) c.method = default_hbe_method(c.kernel.kind);
  if (c.query_format.empty()) c.query_format = c.format;

  if (!(c.kernel.bandwidth > 0.0)) throw ConfigError("bandwidth must be positive (kernel definition)");
  check_method_name(c.method);
  for (const auto& m : c.methods) check_method_name(m);
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw ConfigError("eps must lie in (0,1) (median-of-means guarantee)");
  if (!(c.tau > 0.0 && c.tau < 1.0)) throw ConfigError("tau must lie in (0,1) (KDE query theorem)");
  if (!(c.chi > 0.0 && c.chi < 1.0)) throw ConfigError("chi must lie in (0,1) (mean relaxation theorem)");
  if (c.chi > 1.0 / std::log(1.0 / c.tau))
    throw ConfigError("chi must not exceed 1/ln(1/tau) = " + fmt(1.0 / std::log(1.0 / c.tau)) +
                      " (mean relaxation theorem)");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1] (mean relaxation theorem)");
  if ((c.method == "hbe-exp" || c.method == "hbe-gauss-ball") && !(c.beta > 0.0 && c.beta <= 1.0))
    throw ConfigError("beta must lie in (0,1] (" +
                      std::string(c.method == "hbe-exp" ? "exponential kernel HBE theorem" : "Gaussian ball-carving HBE theorem") +
                      ")");
  if (c.method == "hbe-gauss-euclid" && !(c.t >= 1.0))
    throw ConfigError("t must be at least 1 (Gaussian kernel Euclidean LSH theorem)");
  if (c.p < 1 || c.q < 1) throw ConfigError("p and q must be integers >= 1 (t-Student HBE theorem)");
  if (c.method == "hbe-student" && c.q > c.p) throw ConfigError("q must not exceed p (t-Student HBE theorem)");
  if (!(c.C_N > 0.0)) throw ConfigError("c_n must be positive (KDE query theorem table count)");
  if (c.R && !(*c.R > 0.0)) throw ConfigError("R must be positive");
  if (c.estimator != "kde" && c.estimator != "amr") throw ConfigError("estimator must be kde or amr");
  for (const auto* f : {&c.format, &c.query_format, &c.vector_format})
    if (*f != "csv" && *f != "bin") throw ConfigError("format must be csv or bin, got '" + *f + "'");
  if (c.instances < 1) throw ConfigError("instances must be at least 1");
  check_method_kernel(c.method, c.kernel, c.p);
  return c;
}

Settings to_settings(const RunConfig& c) {
  Settings s;
  s["kernel"] = to_string(c.kernel.kind);
  s["bandwidth"] = fmt(c.kernel.bandwidth);
  s["method"] = c.method;
  s["eps"] = fmt(c.eps);
  s["tau"] = fmt(c.tau);
  s["chi"] = fmt(c.chi);
  s["alpha"] = fmt(c.alpha);
  s["beta"] = fmt(c.beta);
  s["t"] = fmt(c.t);
  s["p"] = std::to_string(c.p);
  s["q"] = std::to_string(c.q);
  s["seed"] = std::to_string(c.seed);
  s["tables"] = std::to_string(c.tables);
  s["c_n"] = fmt(c.C_N);
  if (c.R) s["R"] = fmt(*c.R);
  return s;
}

} // namespace hbe::cli
