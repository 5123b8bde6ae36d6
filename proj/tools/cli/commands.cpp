#include "cli/commands.hpp"

#include <hbe/hbe.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <boost/crc.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <thread>

namespace hbe::cli {

namespace {

using json = nlohmann::json;

std::uint32_t crc32_bytes(const void* data, std::size_t size) {
  boost::crc_32_type crc;
  crc.process_bytes(data, size);
  return crc.checksum();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes through a temporary file so that a failed command leaves no partial output.
template <class F>
void write_atomic(const std::string& path, F&& fill) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    try {
      fill(out);
    } catch (...) {
      out.close();
      std::remove(tmp.c_str());
      throw;
    }
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw InputError("write failed for '" + path + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

void require(const std::string& value, const char* key, const char* command) {
  if (value.empty()) throw ConfigError(std::string(command) + " needs '" + key + "'");
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Dataset {
  std::shared_ptr<const PointSet> unit;  // bandwidth-normalized
  KernelSpec kernel;                     // unit bandwidth
};

Dataset load_unit_dataset(const RunConfig& cfg) {
  PointSet P = load_dataset(cfg.data, parse_data_format(cfg.format), cfg.R);
  auto [unit, kernel] = normalize_bandwidth(P, cfg.kernel);
  return {std::make_shared<const PointSet>(std::move(unit)), kernel};
}

std::vector<std::vector<double>> load_queries(const RunConfig& cfg, const Dataset& ds) {
  PointSet Q = load_dataset(cfg.queries, parse_data_format(cfg.query_format));
  if (Q.d() != ds.unit->d())
    throw InputError("queries have dimension " + std::to_string(Q.d()) + ", dataset has " +
                     std::to_string(ds.unit->d()));
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < Q.n(); ++i) out.push_back(normalize_query(cfg.kernel, Q.row(i)));
  return out;
}

double rff_variance(double mu) { return 1.5 / (mu * mu); }

EstimateReport run_estimator(const RunConfig& cfg, SampleSource& src, const VarianceFn& V) {
  if (cfg.estimator == "amr") {
    EstimatorHandle handle(src, V);
    return amr(handle, cfg.alpha, cfg.tau, cfg.chi);
  }
  return query_kde(src, V, cfg.eps, cfg.tau, cfg.chi);
}

// Estimate for a baseline method or a fresh-hash HBE (no stored tables).
EstimateReport estimate_without_index(const RunConfig& cfg, const std::string& method, const Dataset& ds,
                                      const HbeConstruction* c, std::span<const double> x, std::uint64_t seed) {
  if (method == "rs") {
    RandomSamplingSource src(ds.unit, ds.kernel, x, seed);
    return run_estimator(cfg, src, rs_variance);
  }
  if (method == "rff") {
    RffSource src(ds.unit, ds.kernel, x, seed);
    return run_estimator(cfg, src, rff_variance);
  }
  FreshHashSampler src(ds.unit, *c, x, seed);
  return run_estimator(cfg, src, c->variance);
}

std::string gigabytes(double bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", bytes / 1e9);
  return buf;
}

std::string manifest_path(const std::string& index) { return index + ".manifest.json"; }

std::string row_csv(std::size_t id, const EstimateReport& r) {
  return std::to_string(id) + "," + format_double(r.value) + "," + (r.below_threshold ? "1" : "0") + "," +
         std::to_string(r.samples_used);
}

} // namespace

unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HBE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("HBE_THREADS must be a positive integer");
    hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return hw;
}

int cmd_build(const RunConfig& cfg, std::ostream& out) {
  require(cfg.data, "data", "build");
  require(cfg.index, "index", "build");
  if (!cfg.is_hbe()) throw ConfigError("method '" + cfg.method + "' has no index; query it directly");
  Dataset ds = load_unit_dataset(cfg);
  const PointSet& P = *ds.unit;
  HbeConstruction c = make_construction(cfg.method, P.R(), P.n(), cfg.construction_params());
  VarianceFn V = c.variance;
  std::uint64_t N = cfg.tables ? cfg.tables : required_tables(V, cfg.eps, cfg.tau, cfg.chi, cfg.C_N);
  double hash_doubles = 0.0;
  if (const auto* e = std::get_if<EuclideanSpec>(&c.spec)) hash_doubles = e->D * (P.d() + 1.0);
  else {
    const auto& b = std::get<BallCarvingSpec>(c.spec);
    hash_doubles = static_cast<double>(b.D) * b.t * P.d();
  }
  const double bytes = static_cast<double>(N) * (4.0 * static_cast<double>(P.n()) + 8.0 * hash_doubles);
  if (bytes > 2.0e9)
    throw ResourceError("index needs " + std::to_string(N) + " tables (about " + gigabytes(bytes) + " GB); raise tau or eps, or set 'tables'",
                        0);
  HbeIndex index = HbeIndex::build(ds.unit, c, N, cfg.seed, {}, thread_count());
  std::vector<unsigned char> blob = index.serialize();

  std::string data_bytes = read_file(cfg.data);
  json m;
  m["format"] = "hbe-manifest-1";
  m["method"] = cfg.method;
  m["kernel"] = to_string(cfg.kernel.kind);
  m["bandwidth"] = cfg.kernel.bandwidth;
  m["parameters"] = to_settings(cfg);
  m["seed"] = cfg.seed;
  m["tables"] = N;
  m["n"] = P.n();
  m["d"] = P.d();
  m["R"] = c.R;
  m["hash"] = {{"M", c.M}, {"M_measured", c.M_measured}, {"clamp", c.clamp}};
  m["dataset"] = {{"path", cfg.data}, {"format", cfg.format}, {"bytes", data_bytes.size()},
                  {"crc32", crc32_bytes(data_bytes.data(), data_bytes.size())}};
  m["index"] = {{"bytes", blob.size()}, {"crc32", crc32_bytes(blob.data(), blob.size())}};

  write_atomic(cfg.index, [&](std::ostream& o) {
    o.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  });
  write_atomic(manifest_path(cfg.index), [&](std::ostream& o) { o << m.dump(2) << '\n'; });
  out << "built " << N << " tables over n=" << P.n() << " d=" << P.d() << " (" << cfg.method << ")\n";
  return 0;
}

int cmd_query(const RunConfig& cfg, std::ostream& out) {
  require(cfg.data, "data", "query");
  require(cfg.queries, "queries", "query");
  require(cfg.output, "output", "query");
  Dataset ds = load_unit_dataset(cfg);
  auto queries = load_queries(cfg, ds);
  std::optional<HbeIndex> index;
  if (cfg.is_hbe()) {
    require(cfg.index, "index", "query");
    json m = json::parse(read_file(manifest_path(cfg.index)));
    std::string data_bytes = read_file(cfg.data);
    if (m.at("dataset").at("crc32").get<std::uint32_t>() != crc32_bytes(data_bytes.data(), data_bytes.size()))
      throw FormatError("dataset checksum does not match the index manifest");
    std::string blob = read_file(cfg.index);
    if (m.at("index").at("crc32").get<std::uint32_t>() != crc32_bytes(blob.data(), blob.size()))
      throw FormatError("index checksum does not match its manifest");
    if (m.at("method").get<std::string>() != cfg.method || m.at("kernel").get<std::string>() != to_string(cfg.kernel.kind) ||
        m.at("bandwidth").get<double>() != cfg.kernel.bandwidth)
      throw ConfigError("index was built with a different method, kernel or bandwidth");
    std::istringstream in(blob, std::ios::binary);
    index = HbeIndex::deserialize(in, ds.unit);
  }
  std::vector<std::string> rows(queries.size());
  parallel_for(queries.size(), thread_count(), [&](std::size_t q) {
    const std::uint64_t seed = derive_seed(cfg.seed, Stream::Query, q);
    EstimateReport r;
    try {
      if (index) {
        if (cfg.estimator == "amr") {
          HbeSession session(*index, queries[q], seed);
          EstimatorHandle handle(session, [&](double mu) { return index->V(mu); });
          r = amr(handle, cfg.alpha, cfg.tau, cfg.chi);
        } else {
          r = query_kde(*index, queries[q], cfg.eps, cfg.tau, cfg.chi, seed);
        }
      } else {
        r = estimate_without_index(cfg, cfg.method, ds, nullptr, queries[q], seed);
      }
    } catch (const ResourceError& e) {
      throw ResourceError("query " + std::to_string(q) + ": " + e.what(), e.samples_used);
    }
    rows[q] = row_csv(q, r);
  });
  write_atomic(cfg.output, [&](std::ostream& o) {
    o << "query_id,estimate,below_threshold,samples_used\n";
    for (const auto& row : rows) o << row << '\n';
  });
  out << "answered " << queries.size() << " queries\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  require(cfg.data, "data", "bench");
  require(cfg.queries, "queries", "bench");
  require(cfg.output, "output", "bench");
  Dataset ds = load_unit_dataset(cfg);
  auto queries = load_queries(cfg, ds);
  std::vector<std::string> methods = cfg.methods;
  if (methods.empty()) {
    methods.push_back(cfg.method);
    if (cfg.method != "rs") methods.push_back("rs");
  }
  std::vector<std::optional<HbeConstruction>> cons(methods.size());
  for (std::size_t k = 0; k < methods.size(); ++k) {
    check_method_kernel(methods[k], ds.kernel, cfg.p);
    if (methods[k].rfind("hbe-", 0) == 0)
      cons[k] = make_construction(methods[k], ds.unit->R(), ds.unit->n(), cfg.construction_params());
  }
  std::vector<std::string> rows(queries.size() * methods.size());
  parallel_for(queries.size(), thread_count(), [&](std::size_t q) {
    double mu = kde_exact(*ds.unit, ds.kernel, queries[q]);
    for (std::size_t k = 0; k < methods.size(); ++k) {
      std::uint64_t seed = derive_seed(derive_seed(cfg.seed, Stream::Bench, k), 0, q);
      auto t0 = std::chrono::steady_clock::now();
      EstimateReport r = estimate_without_index(cfg, methods[k], ds, cons[k] ? &*cons[k] : nullptr, queries[q], seed);
      auto t1 = std::chrono::steady_clock::now();
      long long ns = cfg.timing ? std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() : 0;
      double rel = mu > 0.0 ? std::fabs(r.value - mu) / mu : std::fabs(r.value);
      rows[q * methods.size() + k] = std::to_string(q) + "," + methods[k] + "," + format_double(mu) + "," +
                                     format_double(r.value) + "," + format_double(rel) + "," +
                                     std::to_string(r.samples_used) + "," + std::to_string(ns);
    }
  });
  write_atomic(cfg.output, [&](std::ostream& o) {
    o << "query_id,method,mu_true,estimate,rel_error,samples,wall_time_ns\n";
    for (const auto& row : rows) o << row << '\n';
  });
  out << "benchmarked " << methods.size() << " methods on " << queries.size() << " queries\n";
  return 0;
}

int cmd_kmvm(const RunConfig& cfg, std::ostream& out) {
  require(cfg.data, "data", "kmvm");
  require(cfg.vector, "vector", "kmvm");
  require(cfg.output, "output", "kmvm");
  if (cfg.method == "rff") throw ConfigError("kmvm supports the HBE methods and rs");
  Dataset ds = load_unit_dataset(cfg);
  const DataFormat vf = parse_data_format(cfg.vector_format);
  std::vector<double> z = load_vector(cfg.vector, vf);
  if (z.size() != ds.unit->n())
    throw InputError("vector has " + std::to_string(z.size()) + " entries, dataset has " +
                     std::to_string(ds.unit->n()) + " points");
  KmvmOptions opt;
  opt.method = cfg.method == "rs" ? ClassMethod::RandomSampling : ClassMethod::Hbe;
  if (cfg.is_hbe()) opt.hbe_method = cfg.method;
  opt.params = cfg.construction_params();
  opt.crossover = cfg.crossover;
  opt.C_N = cfg.C_N;
  opt.seed = cfg.seed;
  opt.threads = thread_count();
  std::vector<double> y = kmvm_signed(ds.unit, ds.kernel, z, cfg.eps, cfg.tau, cfg.chi, opt);

  std::string report;
  if (!cfg.oracle.empty()) {
    std::vector<double> truth = load_vector(cfg.oracle, vf);
    if (truth.size() != y.size()) throw InputError("oracle vector length does not match");
    const double n = static_cast<double>(y.size());
    double l1 = 0, l2 = 0, linf = 0, ty1 = 0, ty2 = 0, tyinf = 0, mass = 0;
    bool nonneg = true;
    for (double v : z) {
      mass += std::fabs(v);
      if (v < 0.0) nonneg = false;
    }
    std::size_t within = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double e = std::fabs(y[i] - truth[i]);
      l1 += e;
      l2 += e * e;
      linf = std::max(linf, e);
      double a = std::fabs(truth[i]);
      ty1 += a;
      ty2 += a * a;
      tyinf = std::max(tyinf, a);
      if (e <= 3.0 * cfg.eps * cfg.tau * mass + cfg.eps * a) ++within;
    }
    std::ostringstream r;
    r << "metric,value\n";
    r << "coordinates," << y.size() << '\n';
    r << "l1_error," << format_double(l1) << '\n';
    r << "l2_error," << format_double(std::sqrt(l2)) << '\n';
    r << "linf_error," << format_double(linf) << '\n';
    if (nonneg) {
      double ct = 3.0 * cfg.tau * mass;
      r << "l1_bound," << format_double(cfg.eps * (ct * n + ty1)) << '\n';
      r << "l2_bound," << format_double(cfg.eps * (ct * std::sqrt(n) + std::sqrt(ty2))) << '\n';
      r << "linf_bound," << format_double(cfg.eps * (ct + tyinf)) << '\n';
      r << "within_coordinate_bound," << format_double(static_cast<double>(within) / n) << '\n';
    }
    report = r.str();
  }
  write_atomic(cfg.output, [&](std::ostream& o) {
    if (vf == DataFormat::Csv) write_vector_csv(o, y);
    else write_vector_bin(o, y);
  });
  if (!report.empty()) {
    if (cfg.report.empty()) out << report;
    else write_atomic(cfg.report, [&](std::ostream& o) { o << report; });
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  auto rows = run_verify_suite(cfg.seed, cfg.instances);
  if (cfg.output.empty()) write_suite_csv(out, rows);
  else write_atomic(cfg.output, [&](std::ostream& o) { write_suite_csv(o, rows); });
  for (const auto& r : rows)
    if (r.violations > 0) return 1;
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hashing-based kernel density estimation"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file; command line flags override it");
  std::map<std::string, std::string> flags;
  for (const auto& key : config_keys()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (key == "R") name = "diameter";
    if (key == "c_n") name = "cn";
    app.add_option("--" + name, flags[key]);
  }
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"build", "build an index and its manifest"},
      {"query", "answer KDE queries"},
      {"bench", "compare methods against exact KDE"},
      {"kmvm", "approximate kernel matrix-vector product"},
      {"verify", "run the inequality and bound checks"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> argv_store;
  argv_store.push_back("hbe");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    Settings settings;
    if (!config_path.empty()) settings = read_config_file(config_path);
    for (const auto& key : config_keys()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      if (key == "R") name = "diameter";
      if (key == "c_n") name = "cn";
      if (app.count("--" + name) > 0) settings[key] = flags[key];
    }
    RunConfig cfg = make_run_config(settings);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "build") return cmd_build(cfg, out);
    if (cmd == "query") return cmd_query(cfg, out);
    if (cmd == "bench") return cmd_bench(cfg, out);
    if (cmd == "kmvm") return cmd_kmvm(cfg, out);
    return cmd_verify(cfg, out);
  } catch (const std::exception& e) {
    err << "hbe: error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace hbe::cli
