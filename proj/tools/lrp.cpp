// Command-line front end: reproducible percolation sampling, distance
// computations, renormalization checks and scaling experiments, with
// persisted JSON/CSV artifacts and a run manifest per invocation.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lrp/artifacts.hpp"
#include "lrp/config.hpp"
#include "lrp/criteria.hpp"
#include "lrp/experiments.hpp"
#include "lrp/graphdist.hpp"
#include "lrp/parallel.hpp"
#include "lrp/renorm.hpp"
#include "lrp/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Collects written files; on failure everything written so far is removed.
class OutputSession {
 public:
  explicit OutputSession(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }
  ~OutputSession() {
    if (committed_) return;
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    out.close();
    written_.push_back(p);
    names_.push_back(name);
  }

  const std::vector<std::string>& names() const { return names_; }
  const fs::path& dir() const { return dir_; }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

struct RunContext {
  lrp::ParsedConfig parsed;
  std::string subcommand;
  std::string started;
  json hashes = json::object();
};

void write_manifest(OutputSession& session, const RunContext& ctx) {
  json manifest{{"tool_version", kToolVersion},
                {"config_hash", hex64(ctx.parsed.config_hash)},
                {"seed", ctx.parsed.config.master_seed},
                {"subcommand", ctx.subcommand},
                {"outputs", ctx.hashes},
                {"started", ctx.started},
                {"finished", now_iso()},
                {"config_echo", ctx.parsed.canonical_text}};
  json files = json::array();
  for (const auto& n : session.names()) files.push_back(n);
  files.push_back("manifest-" + ctx.subcommand + ".json");
  manifest["output_files"] = files;
  session.write("manifest-" + ctx.subcommand + ".json", manifest.dump(2) + "\n");
}

// Wraps results with the config echo and runtime block; registers the
// deterministic hash (runtime excluded) in the manifest.
void emit_result(OutputSession& session, RunContext& ctx, const std::string& name,
                 json results, double wall_seconds) {
  json doc{{"config", lrp::config_to_json(ctx.parsed.config)},
           {"results", std::move(results)},
           {"runtime", {{"wall_clock_seconds", wall_seconds}, {"written", now_iso()}}}};
  const std::uint64_t h = lrp::result_hash(doc);
  ctx.hashes[name] = hex64(h);
  session.write(name, doc.dump(2) + "\n");
  std::printf("%s result_hash=%s\n", name.c_str(), hex64(h).c_str());
}

double require_theta(const lrp::ExperimentConfig& config) {
  if (!(config.theta_hat > 0.0))
    throw UsageError("this subcommand needs theta_hat > 0 in the config (run `theta` first)");
  return config.theta_hat;
}

int resolve_threads(int flag_threads, int config_threads) {
  if (flag_threads > 0) return flag_threads;
  if (config_threads > 0) return config_threads;
  if (const char* env = std::getenv("LRP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return lrp::default_thread_count();
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// --- subcommand bodies ------------------------------------------------------

void run_sample(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  const auto shape = lrp::BoxShape::cube(c.kernel.dim, c.sizes.back());
  const auto env = lrp::sample_box(c.kernel, shape, c.master_seed);
  const std::string text = lrp::serialize(env);
  session.write("environment.lrp", text);
  ctx.hashes["environment.lrp"] = hex64(lrp::fnv1a64(text));
  std::printf("environment.lrp hash=%s long_edges=%lld\n",
              hex64(lrp::fnv1a64(text)).c_str(),
              static_cast<long long>(env.long_edge_count()));
  emit_result(session, ctx, "sample.json",
              json{{"long_edges", env.long_edge_count()},
                   {"vertices", env.vertex_count()},
                   {"environment_hash", hex64(lrp::environment_hash(env))}},
              timer.seconds());
}

void run_distances(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  const auto shape = lrp::BoxShape::cube(c.kernel.dim, c.sizes.back());
  const auto env = lrp::sample_box(c.kernel, shape, c.master_seed);
  const lrp::VertexId source[1] = {0};
  const auto field = lrp::bfs_distances(env, source);
  session.write("distances.csv", lrp::distance_field_csv(field));
  std::int64_t sum = 0;
  std::int32_t max = 0;
  for (std::int32_t dv : field.dist) {
    sum += dv;
    max = std::max(max, dv);
  }
  emit_result(session, ctx, "distances.json",
              json{{"source", 0},
                   {"max_distance", max},
                   {"mean_distance", static_cast<double>(sum) / env.vertex_count()}},
              timer.seconds());
}

void run_theta(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto est = lrp::estimate_theta(ctx.parsed.config);
  std::string csv = "separation,median\n";
  for (std::size_t i = 0; i < est.separations.size(); ++i) {
    csv += std::to_string(est.separations[i]);
    csv += ',';
    csv += lrp::format_double(est.fit.medians[i]);
    csv += '\n';
  }
  session.write("theta_medians.csv", csv);
  emit_result(session, ctx, "theta.json", lrp::to_json(est), timer.seconds());
  std::printf("theta_hat=%.6f ci=[%.6f, %.6f] mean_slope=%.6f\n", est.theta(), est.fit.ci_lo,
              est.fit.ci_hi, est.mean_slope);
}

void run_growth(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  const double theta = require_theta(c);
  const auto result = lrp::estimate_volume_exponent(c, theta, theta, theta);

  // One representative curve for the CSV artifact.
  const auto shape = lrp::BoxShape::cube(c.kernel.dim, c.sizes.back());
  const auto env = lrp::sample_box(c.kernel, shape, c.master_seed);
  std::vector<std::int32_t> center(static_cast<std::size_t>(c.kernel.dim),
                                   c.sizes.back() / 2);
  const lrp::BoxIndexer idx(shape);
  const auto curve = lrp::ball_curve(env, idx.index(center), result.radii.back());
  session.write("ball_curve.csv", lrp::ball_curve_csv(curve));

  emit_result(session, ctx, "growth.json", lrp::to_json(result), timer.seconds());
  std::printf("volume slope=%.6f target=%.6f diff=%.6f in [%.6f, %.6f]\n", result.fit.slope,
              result.target, result.diff, result.diff_lo, result.diff_hi);
}

void run_lowertail(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  const auto curve = lrp::lower_tail_experiment(c, require_theta(c));
  std::string csv = "eps,phat,wilson_lo,wilson_hi,used\n";
  for (std::size_t i = 0; i < curve.eps.size(); ++i) {
    csv += lrp::format_double(curve.eps[i]);
    csv += ',';
    csv += lrp::format_double(curve.phat[i]);
    csv += ',';
    csv += lrp::format_double(curve.ci[i].lo);
    csv += ',';
    csv += lrp::format_double(curve.ci[i].hi);
    csv += ',';
    csv += curve.used[i] ? '1' : '0';
    csv += '\n';
  }
  session.write("lowertail.csv", csv);
  emit_result(session, ctx, "lowertail.json", lrp::to_json(curve), timer.seconds());
  if (curve.slope) {
    std::printf("lower-tail slope=%.6f target=%.6f\n", *curve.slope, curve.target);
  } else {
    std::printf("lower-tail slope: fewer than 4 usable grid points\n");
  }
}

void run_balltail(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  const auto result = lrp::ball_tail_experiment(c, require_theta(c));
  std::string csv = "K,phat,wilson_lo,wilson_hi\n";
  for (std::size_t i = 0; i < result.phat.size(); ++i) {
    csv += std::to_string(i + 1);
    csv += ',';
    csv += lrp::format_double(result.phat[i]);
    csv += ',';
    csv += lrp::format_double(result.ci[i].lo);
    csv += ',';
    csv += lrp::format_double(result.ci[i].hi);
    csv += '\n';
  }
  session.write("balltail.csv", csv);
  emit_result(session, ctx, "balltail.json", lrp::to_json(result), timer.seconds());
  std::printf("ball-tail radius=%d observable_K=%d log_slope=%.4f nonincreasing=%d\n",
              result.radius, result.observable_k, result.log_slope,
              result.nonincreasing ? 1 : 0);
  if (!result.nonincreasing)
    throw InvariantFailure("ball-tail exceedance probabilities are not nonincreasing");
}

void run_renorm_check(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  json checks = json::array();
  for (std::int32_t w_axis : {2, 3, 5}) {
    std::vector<std::int32_t> w(static_cast<std::size_t>(c.kernel.dim), 0);
    w[0] = w_axis;
    const double marginal =
        lrp::block_edge_marginal(c.kernel, c.block_k, w, lrp::criteria::kAggregationRelTol);
    const double direct = lrp::edge_probability_value(c.kernel, w);
    checks.push_back(json{{"k", c.block_k},
                          {"w", w_axis},
                          {"marginal", marginal},
                          {"direct", direct},
                          {"rel_err", direct == 0.0 ? 0.0 : std::abs(marginal - direct) / direct}});
    std::printf("renorm-check k=%d w=%d marginal=%.12g direct=%.12g\n", c.block_k, w_axis,
                marginal, direct);
  }
  emit_result(session, ctx, "renorm_check.json", json{{"checks", checks}, {"pass", true}},
              timer.seconds());
}

void run_good_blocks(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  const double theta = require_theta(c);
  const std::int32_t n = c.sizes.back();
  if (n % c.block_k != 0) throw UsageError("good-blocks: block_k must divide the box side");

  // CSV artifact from the first replica; aggregates over all replicas.
  const int replicas = c.goodblocks_replicas > 0 ? c.goodblocks_replicas : c.replicas;
  const auto shape = lrp::BoxShape::cube(c.kernel.dim, n);
  std::vector<lrp::GoodBlockReport> first_reports;
  std::int64_t classified = 0, good = 0, bad1 = 0, bad2 = 0, bad3 = 0;
  for (int rep = 0; rep < replicas; ++rep) {
    const std::uint64_t seed = lrp::replica_seed(c.master_seed, 101, 0, rep);
    const auto env = lrp::sample_box(c.kernel, shape, seed);
    lrp::BlockGrid grid(env.shape(), c.block_k);
    const auto graph = lrp::build_renorm_graph(env, c.block_k);
    for (std::int64_t b = 0; b < grid.block_count(); ++b) {
      if (!grid.interior(b)) continue;
      const auto report = lrp::classify_good_block(env, grid, b, c.delta, theta, &graph);
      ++classified;
      if (report.good) ++good;
      if (!report.good1) ++bad1;
      if (!report.good2) ++bad2;
      if (!report.good3) ++bad3;
      if (rep == 0) first_reports.push_back(report);
    }
  }
  session.write("good_blocks.csv", lrp::good_block_csv(first_reports));
  emit_result(session, ctx, "good_blocks.json",
              json{{"replicas", replicas},
                   {"classified", classified},
                   {"good", good},
                   {"good_fraction", classified ? static_cast<double>(good) / classified : 0.0},
                   {"bad_family1", bad1},
                   {"bad_family2", bad2},
                   {"bad_family3", bad3},
                   {"delta", c.delta},
                   {"theta_hat", theta}},
              timer.seconds());
  std::printf("good-blocks: %lld/%lld good (delta=%g, theta_hat=%g)\n",
              static_cast<long long>(good), static_cast<long long>(classified), c.delta, theta);
}

void run_boxcount(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  const double theta = require_theta(c);

  // Single-environment X_k curve over a radius grid.
  const std::int32_t n = c.sizes.back();
  if (n % c.block_k != 0) throw UsageError("boxcount: block_k must divide the box side");
  const auto shape = lrp::BoxShape::cube(c.kernel.dim, n);
  const auto env = lrp::sample_box(c.kernel, shape, c.master_seed);
  lrp::BlockGrid grid(env.shape(), c.block_k);
  const std::int32_t r_max = static_cast<std::int32_t>(
      std::min<double>(n / 2, 2.0 * c.delta * std::pow(c.block_k, theta) + 8.0));
  std::vector<std::pair<std::int32_t, std::int64_t>> counts;
  for (std::int32_t r = 0; r <= r_max; ++r)
    counts.emplace_back(r, lrp::box_count(env, grid, r).count);
  session.write("boxcount.csv", lrp::box_count_csv(counts));

  // Metric box counts per subdivision level.
  json levels = json::array();
  for (std::int32_t m : c.box_count_m) {
    const auto result = lrp::metric_box_count(c, theta, m);
    levels.push_back(lrp::to_json(result));
    std::printf("metric box count m=%d radius=%d median_max=%.2f normalizer=%.4f\n", m,
                result.radius, result.median_max, result.normalizer);
  }
  emit_result(session, ctx, "boxcount.json",
              json{{"xk_curve_block_k", c.block_k}, {"metric", levels}}, timer.seconds());
}

void run_coupling_check(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto result = lrp::coupling_check(ctx.parsed.config);
  emit_result(session, ctx, "coupling.json", lrp::to_json(result), timer.seconds());
  std::printf("coupling-check replicas=%d edge_violations=%lld distance_violations=%lld\n",
              result.replicas, static_cast<long long>(result.edge_violations),
              static_cast<long long>(result.distance_violations));
  if (result.edge_violations != 0 || result.distance_violations != 0)
    throw InvariantFailure("coupling monotonicity violated");
}

json read_json_if_present(const fs::path& p) {
  if (!fs::exists(p)) return json();
  std::ifstream in(p);
  json j;
  in >> j;
  return j;
}

void run_report(OutputSession& session, RunContext& ctx) {
  Timer timer;
  const auto& c = ctx.parsed.config;
  const fs::path dir = session.dir();
  std::ostringstream out;
  out << "run summary (tool " << kToolVersion << ", config " << hex64(ctx.parsed.config_hash)
      << ")\n\n";
  bool any = false;

  double theta = c.theta_hat;
  const json theta_doc = read_json_if_present(dir / "theta.json");
  if (!theta_doc.is_null()) {
    any = true;
    const auto& r = theta_doc["results"];
    theta = r["theta_hat"].get<double>();
    const double lo = r["ci_lo"].get<double>(), hi = r["ci_hi"].get<double>();
    out << "distance exponent: theta_hat = " << lrp::format_double(theta) << "  CI [" << lo
        << ", " << hi << "]  width " << hi - lo << "  ("
        << ((hi - lo) <= lrp::criteria::kThetaCiWidthMax ? "PASS" : "FAIL")
        << ": width <= " << lrp::criteria::kThetaCiWidthMax << ")\n";
  }

  const json growth = read_json_if_present(dir / "growth.json");
  if (!growth.is_null()) {
    any = true;
    const auto& r = growth["results"];
    const double slope = r["slope"].get<double>();
    const double target = r["target_d_over_theta"].get<double>();
    out << "volume growth: slope = " << slope << " vs d/theta_hat = " << target << "  ("
        << (std::abs(slope - target) <= lrp::criteria::kVolumeSlopeTol ? "PASS" : "FAIL")
        << ": |diff| <= " << lrp::criteria::kVolumeSlopeTol << ")";
    const int dropped = r["discarded_radii"].get<int>();
    if (dropped > 0) out << "  [" << dropped << " saturated radii excluded]";
    out << "\n";
  }

  const json lower = read_json_if_present(dir / "lowertail.json");
  if (!lower.is_null()) {
    any = true;
    const auto& r = lower["results"];
    if (r.contains("slope")) {
      const double slope = r["slope"].get<double>();
      const double target = r["target_2d_over_theta"].get<double>();
      out << "lower tail: slope = " << slope << " vs 2d/theta_hat = " << target << "  ("
          << (std::abs(slope - target) <= lrp::criteria::kLowerTailSlopeTol ? "PASS" : "FAIL")
          << ": |diff| <= " << lrp::criteria::kLowerTailSlopeTol << ")\n";
    } else {
      out << "lower tail: not enough usable grid points for a slope (FAIL)\n";
    }
  }

  const json balltail = read_json_if_present(dir / "balltail.json");
  if (!balltail.is_null()) {
    any = true;
    const auto& r = balltail["results"];
    const bool mono = r["nonincreasing"].get<bool>();
    const double slope = r["log_slope"].get<double>();
    const bool decay = slope <= lrp::criteria::kBallTailMaxLogSlope;
    out << "ball tail: nonincreasing = " << (mono ? "yes" : "no") << ", ln-slope = " << slope
        << "  (" << (mono && decay ? "PASS" : "FAIL") << ": slope <= "
        << lrp::criteria::kBallTailMaxLogSlope << ")\n";
  }

  const json renorm = read_json_if_present(dir / "renorm_check.json");
  if (!renorm.is_null()) {
    any = true;
    out << "renormalization marginal identity: "
        << (renorm["results"]["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
  }

  const json coupling = read_json_if_present(dir / "coupling.json");
  if (!coupling.is_null()) {
    any = true;
    const auto& r = coupling["results"];
    const bool ok = r["edge_violations"].get<std::int64_t>() == 0 &&
                    r["distance_violations"].get<std::int64_t>() == 0;
    out << "coupling monotonicity: " << (ok ? "PASS" : "FAIL") << " ("
        << r["replicas"].get<int>() << " replicas)\n";
  }

  const json boxcount = read_json_if_present(dir / "boxcount.json");
  if (!boxcount.is_null() && boxcount["results"].contains("metric")) {
    any = true;
    double lo = 1e300, hi = 0.0;
    for (const auto& level : boxcount["results"]["metric"]) {
      const double norm = level["normalizer"].get<double>();
      lo = std::min(lo, norm);
      hi = std::max(hi, norm);
    }
    const bool ok = hi <= lrp::criteria::kMetricLogRatioMax * lo;
    out << "metric box count: normalizer range [" << lo << ", " << hi << "]  ("
        << (ok ? "PASS" : "FAIL") << ": ratio <= " << lrp::criteria::kMetricLogRatioMax
        << ")\n";
  }

  const json stretched = read_json_if_present(dir / "stretched.json");
  if (!stretched.is_null()) {
    any = true;
    out << "stretched moments: bounded = "
        << (stretched["results"]["bounded"].get<bool>() ? "yes (PASS)" : "no (FAIL)") << "\n";
  }

  if (!any) throw UsageError("report: no result documents found in the output directory");
  out << "\nsaturated radii and excluded grid points are recorded in the per-run JSON files.\n";
  session.write("report.txt", out.str());
  std::fputs(out.str().c_str(), stdout);
  emit_result(session, ctx, "report.json", json{{"report", "report.txt"}}, timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical long-range percolation laboratory"};
  app.require_subcommand(0, 1);

  std::string config_path, out_dir = "lrp-out";
  int flag_threads = 0;
  lrp::ConfigOverrides overrides;
  std::string sizes_flag, eps_flag;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  int d_flag = 0;
  double beta_flag = 0.0, delta_flag = 0.0, theta_flag = 0.0;
  bool beta_set = false, delta_set = false, theta_set = false;
  int replicas_flag = 0;
  std::int32_t block_k_flag = 0;

  app.add_option("--config", config_path, "configuration file (key = value lines)");
  app.add_option("--seed", seed_flag, "master seed")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--threads", flag_threads, "worker pool size (0 = auto)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--d", d_flag, "lattice dimension");
  app.add_option("--beta", beta_flag, "kernel strength beta")
      ->each([&](const std::string&) { beta_set = true; });
  app.add_option("--delta", delta_flag, "good-block threshold coefficient")
      ->each([&](const std::string&) { delta_set = true; });
  app.add_option("--block-k", block_k_flag, "block side for renormalization");
  app.add_option("--sizes", sizes_flag, "comma-separated box sides");
  app.add_option("--replicas", replicas_flag, "replicas per size");
  app.add_option("--eps-grid", eps_flag, "comma-separated lower-tail epsilons");
  app.add_option("--theta-hat", theta_flag, "distance exponent for threshold experiments")
      ->each([&](const std::string&) { theta_set = true; });

  CLI::App* sub_sample = app.add_subcommand("sample", "sample one environment and persist it");
  CLI::App* sub_distances = app.add_subcommand("distances", "distance field from the origin");
  CLI::App* sub_growth = app.add_subcommand("growth", "ball-volume growth exponent");
  CLI::App* sub_lowertail = app.add_subcommand("lowertail", "lower-tail probabilities");
  CLI::App* sub_balltail = app.add_subcommand("balltail", "ball-size exceedance tail");
  CLI::App* sub_renorm = app.add_subcommand("renorm-check", "block edge marginal identity");
  CLI::App* sub_good = app.add_subcommand("good-blocks", "crossing-distance block classification");
  CLI::App* sub_boxcount = app.add_subcommand("boxcount", "chemical box counts");
  CLI::App* sub_coupling = app.add_subcommand("coupling-check", "coupled-pair monotonicity");
  CLI::App* sub_theta = app.add_subcommand("theta", "distance exponent estimate");
  CLI::App* sub_report = app.add_subcommand("report", "summarize artifacts in the output dir");

  CLI::App* sub_kernel = app.add_subcommand("kernel", "kernel utilities");
  CLI::App* kernel_dump = sub_kernel->add_subcommand("dump", "CSV of canonical kernel values");
  int kd_d = 1;
  double kd_beta = 1.0;
  std::int32_t kd_radius = 8;
  kernel_dump->add_option("--d", kd_d, "dimension");
  kernel_dump->add_option("--beta", kd_beta, "beta");
  kernel_dump->add_option("--radius", kd_radius, "inf-norm radius");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();
  kernel_dump->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (kernel_dump->parsed()) {
      lrp::KernelSpec spec;
      spec.dim = kd_d;
      spec.beta = kd_beta;
      const lrp::KernelTable table(spec, kd_radius);
      std::fputs(lrp::kernel_dump_csv(table).c_str(), stdout);
      return 0;
    }

    if (app.get_subcommands().empty()) {
      std::fputs(app.help().c_str(), stderr);
      return 2;
    }

    // Assemble overrides from flags.
    if (d_flag > 0) overrides.d = d_flag;
    if (beta_set) overrides.beta = beta_flag;
    if (seed_set) overrides.seed = seed_flag;
    if (delta_set) overrides.delta = delta_flag;
    if (theta_set) overrides.theta_hat = theta_flag;
    if (replicas_flag > 0) overrides.replicas = replicas_flag;
    if (block_k_flag > 0) overrides.block_k = block_k_flag;
    auto parse_csv_list = [](const std::string& text) {
      std::vector<std::string> items;
      std::size_t start = 0;
      while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        items.push_back(comma == std::string::npos ? text.substr(start)
                                                   : text.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return items;
    };
    if (!sizes_flag.empty()) {
      std::vector<std::int32_t> sizes;
      for (const auto& item : parse_csv_list(sizes_flag)) sizes.push_back(std::stoi(item));
      overrides.sizes = sizes;
    }
    if (!eps_flag.empty()) {
      std::vector<double> eps;
      for (const auto& item : parse_csv_list(eps_flag)) eps.push_back(std::stod(item));
      overrides.eps_grid = eps;
    }

    std::optional<std::string> file_text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot open config file: " + config_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      file_text = ss.str();
    }

    RunContext ctx;
    ctx.parsed = lrp::parse_config(file_text, overrides);
    ctx.parsed.config.threads = resolve_threads(flag_threads, ctx.parsed.config.threads);
    ctx.started = now_iso();

    CLI::App* active = app.get_subcommands().front();
    ctx.subcommand = active->get_name();

    OutputSession session{fs::path(out_dir)};
    if (active == sub_sample) run_sample(session, ctx);
    else if (active == sub_distances) run_distances(session, ctx);
    else if (active == sub_theta) run_theta(session, ctx);
    else if (active == sub_growth) run_growth(session, ctx);
    else if (active == sub_lowertail) run_lowertail(session, ctx);
    else if (active == sub_balltail) run_balltail(session, ctx);
    else if (active == sub_renorm) run_renorm_check(session, ctx);
    else if (active == sub_good) run_good_blocks(session, ctx);
    else if (active == sub_boxcount) run_boxcount(session, ctx);
    else if (active == sub_coupling) run_coupling_check(session, ctx);
    else if (active == sub_report) run_report(session, ctx);
    else throw UsageError("unknown subcommand");

    write_manifest(session, ctx);
    session.commit();
    return 0;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const lrp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InvariantFailure& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 1;
  }
}
