#include "lrp/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lrp/config.hpp"

namespace lrp {

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["canonical"] = canonical_config_text(config);
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config_text(config))));
  j["hash"] = hash;
  return j;
}

nlohmann::json to_json(const ScalingFit& fit) {
  return nlohmann::json{{"log_x", fit.log_x},
                        {"log_y", fit.log_y},
                        {"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"ci_lo", fit.ci_lo},
                        {"ci_hi", fit.ci_hi},
                        {"aggregates", fit.medians},
                        {"bootstrap_rounds", fit.bootstrap_rounds}};
}

nlohmann::json to_json(const ThetaEstimate& est) {
  nlohmann::json sizes = nlohmann::json::array();
  for (std::size_t i = 0; i < est.samples.size(); ++i) {
    std::vector<double> sorted = est.samples[i];
    std::sort(sorted.begin(), sorted.end());
    sizes.push_back(nlohmann::json{
        {"separation", est.separations[i]},
        {"replicas", sorted.size()},
        {"median", est.fit.medians[i]},
        {"min", sorted.front()},
        {"max", sorted.back()},
        {"q25", sorted[sorted.size() / 4]},
        {"q75", sorted[(3 * sorted.size()) / 4]},
    });
  }
  return nlohmann::json{{"fit", to_json(est.fit)},
                        {"theta_hat", est.fit.slope},
                        {"ci_lo", est.fit.ci_lo},
                        {"ci_hi", est.fit.ci_hi},
                        {"mean_slope", est.mean_slope},
                        {"elongated", est.elongated},
                        {"per_size", sizes}};
}

nlohmann::json to_json(const VolumeGrowthResult& r) {
  return nlohmann::json{{"fit", to_json(r.fit)},
                        {"radii", r.radii},
                        {"box_side", r.box_side},
                        {"discarded_radii", r.discarded_radii},
                        {"slope", r.fit.slope},
                        {"target_d_over_theta", r.target},
                        {"diff", r.diff},
                        {"diff_lo", r.diff_lo},
                        {"diff_hi", r.diff_hi}};
}

nlohmann::json to_json(const BallTailResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.phat.size(); ++i) {
    rows.push_back(nlohmann::json{{"K", i + 1},
                                  {"phat", r.phat[i]},
                                  {"wilson_lo", r.ci[i].lo},
                                  {"wilson_hi", r.ci[i].hi}});
  }
  return nlohmann::json{{"radius", r.radius},
                        {"box_side", r.box_side},
                        {"scale_c", r.scale_c},
                        {"replicas", r.replicas},
                        {"exceedance", rows},
                        {"observable_k", r.observable_k},
                        {"log_slope", r.log_slope},
                        {"nonincreasing", r.nonincreasing}};
}

nlohmann::json to_json(const LowerTailCurve& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.eps.size(); ++i) {
    rows.push_back(nlohmann::json{{"eps", r.eps[i]},
                                  {"hits", r.hits[i]},
                                  {"phat", r.phat[i]},
                                  {"wilson_lo", r.ci[i].lo},
                                  {"wilson_hi", r.ci[i].hi},
                                  {"used", static_cast<bool>(r.used[i])}});
  }
  nlohmann::json j{{"separation", r.separation},
                   {"replicas", r.replicas},
                   {"theta_hat", r.theta_hat},
                   {"target_2d_over_theta", r.target},
                   {"points", rows}};
  if (r.slope) j["slope"] = *r.slope;
  return j;
}

nlohmann::json to_json(const StretchedMomentResult& r) {
  return nlohmann::json{{"sizes", r.sizes},
                        {"moments", r.moments},
                        {"eta", r.eta},
                        {"mann_kendall_pvalue", r.mk_pvalue},
                        {"increasing_trend", r.increasing_trend},
                        {"bounded", r.bounded}};
}

nlohmann::json to_json(const MetricBoxCountResult& r) {
  return nlohmann::json{{"m", r.m},
                        {"block_side", r.block_side},
                        {"radius", r.radius},
                        {"max_counts", r.max_counts},
                        {"median_max", r.median_max},
                        {"normalizer", r.normalizer}};
}

nlohmann::json to_json(const CouplingCheckResult& r) {
  return nlohmann::json{{"replicas", r.replicas},
                        {"edge_violations", r.edge_violations},
                        {"distance_violations", r.distance_violations},
                        {"low_edges", r.low_edges},
                        {"high_edges", r.high_edges}};
}

std::string ball_curve_csv(const BallCurve& curve) {
  std::string out = "k,size,saturated\n";
  for (std::int32_t k = 0; k <= curve.k_max(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += std::to_string(curve.sizes[static_cast<std::size_t>(k)]);
    out += ',';
    out += curve.saturated(k) ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string distance_field_csv(const DistanceField& field) {
  std::string out = "vertex,distance\n";
  for (std::size_t v = 0; v < field.dist.size(); ++v) {
    out += std::to_string(v);
    out += ',';
    out += std::to_string(field.dist[v]);
    out += '\n';
  }
  return out;
}

std::string good_block_csv(const std::vector<GoodBlockReport>& reports) {
  std::string out = "block,good,good1,good2,good3,witness_dist,delta,theta_hat,nbh_degree\n";
  for (const auto& r : reports) {
    out += std::to_string(r.block);
    out += ',';
    out += r.good ? '1' : '0';
    out += ',';
    out += r.good1 ? '1' : '0';
    out += ',';
    out += r.good2 ? '1' : '0';
    out += ',';
    out += r.good3 ? '1' : '0';
    out += ',';
    out += r.witness ? std::to_string(r.witness->distance) : std::string("-1");
    out += ',';
    out += format_double(r.delta);
    out += ',';
    out += format_double(r.theta_hat);
    out += ',';
    out += std::to_string(r.nbh_degree);
    out += '\n';
  }
  return out;
}

std::string box_count_csv(const std::vector<std::pair<std::int32_t, std::int64_t>>& counts) {
  std::string out = "r,X_k\n";
  for (const auto& [r, x] : counts) {
    out += std::to_string(r);
    out += ',';
    out += std::to_string(x);
    out += '\n';
  }
  return out;
}

std::string kernel_dump_csv(const KernelTable& table) {
  std::string out = "w_canonical,J,p\n";
  for (const auto& entry : table.entries()) {
    std::string w;
    for (std::size_t i = 0; i < entry.canonical.size(); ++i) {
      if (i) w += ' ';
      w += std::to_string(entry.canonical[i]);
    }
    out += w;
    out += ',';
    out += std::isinf(entry.j) ? std::string("inf") : format_double(entry.j);
    out += ',';
    out += format_double(entry.p);
    out += '\n';
  }
  return out;
}

std::uint64_t result_hash(nlohmann::json doc) {
  doc.erase("runtime");
  return fnv1a64(doc.dump());
}

}  // namespace lrp
