#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "patchdet/aggregation.hpp"
#include "patchdet/augmentation.hpp"
#include "patchdet/evaluation.hpp"
#include "patchdet/patching.hpp"
#include "patchdet/recipes.hpp"
#include "patchdet/scoring.hpp"

namespace patchdet {

// PatchRegion <-> {"x":int,"y":int,"size":int,"aligned":bool}
nlohmann::json region_to_json(const PatchRegion& region);
PatchRegion region_from_json(const nlohmann::json& doc);

nlohmann::json log_to_json(const AugmentationLog& log);
AugmentationLog log_from_json(const nlohmann::json& doc);

nlohmann::json augmentation_config_to_json(const AugmentationConfig& config);
AugmentationConfig augmentation_config_from_json(const nlohmann::json& doc);

nlohmann::json recipe_to_json(const DatasetRecipe& recipe);
DatasetRecipe recipe_from_json(const nlohmann::json& doc);

nlohmann::json source_entry_to_json(const SourceEntry& entry);
SourceEntry source_entry_from_json(const nlohmann::json& doc);

/// JSON-lines manifest: one source entry per line.
SourceManifest read_source_manifest(const std::string& path);
void write_source_manifest(const std::string& path, const SourceManifest& manifest);

nlohmann::json dataset_row_to_json(const DatasetRow& row);
DatasetRow dataset_row_from_json(const nlohmann::json& doc);
void write_dataset_output(const std::string& path, const DatasetOutput& output);
DatasetOutput read_dataset_output(const std::string& path);

nlohmann::json training_metadata_to_json(const TrainingConfigMetadata& metadata);

/// Verdict record as emitted by `detect`: the per-image JSON object.
nlohmann::json verdict_to_json(const std::string& image_path, const ImageVerdict& verdict);

nlohmann::json roc_to_json(const RocResult& roc);
nlohmann::json confusion_to_json(const ConfusionResult& confusion);
nlohmann::json histogram_to_json(const HistogramResult& hist);
nlohmann::json orthogonality_to_json(const OrthogonalityReport& report);

std::string roc_curve_to_csv(const RocResult& roc);
std::string histogram_to_csv(const HistogramResult& hist);
std::string policy_rows_to_csv(const std::vector<PolicyComparisonRow>& rows);
nlohmann::json policy_rows_to_json(const std::vector<PolicyComparisonRow>& rows);

SimulationSpec simulation_spec_from_json(const nlohmann::json& doc);
nlohmann::json simulation_spec_to_json(const SimulationSpec& spec);

/// Analytic scorer description; planted-signal patterns are built
/// procedurally ("checker" with a period) at the given patch size.
AnalyticScorerSpec analytic_spec_from_json(const nlohmann::json& doc, int patch_size);

}  // namespace patchdet
