#pragma once

#include <string>

#include "json.hpp"
#include "lrp/experiments.hpp"
#include "lrp/graphdist.hpp"
#include "lrp/renorm.hpp"

namespace lrp {

nlohmann::json config_to_json(const ExperimentConfig& config);
nlohmann::json to_json(const ScalingFit& fit);
nlohmann::json to_json(const ThetaEstimate& est);
nlohmann::json to_json(const VolumeGrowthResult& r);
nlohmann::json to_json(const BallTailResult& r);
nlohmann::json to_json(const LowerTailCurve& r);
nlohmann::json to_json(const StretchedMomentResult& r);
nlohmann::json to_json(const MetricBoxCountResult& r);
nlohmann::json to_json(const CouplingCheckResult& r);

// CSV emitters (17 significant digits for floats, LF line endings).
std::string ball_curve_csv(const BallCurve& curve);
std::string distance_field_csv(const DistanceField& field);
std::string good_block_csv(const std::vector<GoodBlockReport>& reports);
std::string box_count_csv(const std::vector<std::pair<std::int32_t, std::int64_t>>& counts);
std::string kernel_dump_csv(const KernelTable& table);

// Hash of the deterministic content of a result document: the volatile
// "runtime" object (wall clock, timestamps) is dropped before hashing, so
// equal (config, seed) runs produce equal hashes at any thread count.
std::uint64_t result_hash(nlohmann::json doc);

std::string format_double(double v);  // %.17g

}  // namespace lrp
