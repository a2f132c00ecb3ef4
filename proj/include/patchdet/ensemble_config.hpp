#pragma once

#include <string>

#include <json.hpp>

#include "patchdet/aggregation.hpp"

namespace patchdet {

/// Build a runnable ensemble from its JSON description: each scorer entry is
/// either a `backend` (serialized model artifact) or an `analytic` spec, plus
/// its sampling and aggregation policies. Patch sizes must be consistent.
/// Throws ConfigError / ModelLoadError.
EnsembleConfig load_ensemble_config(const nlohmann::json& doc);
EnsembleConfig load_ensemble_config_file(const std::string& path);

/// Deployment-default ensemble: five model backends <dir>/d1.json .. d5.json,
/// the first sampling 200 random patches, the rest 180 grid-aligned, all with
/// the alarm-any aggregation and mean fusion.
EnsembleConfig default_ensemble_config(const std::string& model_dir);

}  // namespace patchdet
