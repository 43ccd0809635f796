#pragma once

#include <json.hpp>

#include "dml/engine.hpp"
#include "dml/learners.hpp"
#include "dml/simulation.hpp"

namespace dml {

nlohmann::json to_json(const LearnerSpec& spec);
LearnerSpec learner_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DmlConfig& cfg);
DmlConfig dml_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DgpSpec& spec);
DgpSpec dgp_spec_from_json(const nlohmann::json& j);

/// Stable field names: theta, se, per_fold, mse_w, mse_y, mse_z, n_trimmed, seed.
nlohmann::json to_json(const EstimateRecord& r);
EstimateRecord estimate_record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SimCell& cell);

}  // namespace dml
