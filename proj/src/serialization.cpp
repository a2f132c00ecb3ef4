#include "patchdet/serialization.hpp"

#include <fstream>
#include <sstream>

#include "patchdet/error.hpp"

namespace patchdet {

using nlohmann::json;

namespace {

json make_object(std::initializer_list<std::pair<const char*, json>> fields) {
    json doc = json::object();
    for (const auto& [key, value] : fields)
        doc[key] = value;
    return doc;
}

Verdict label_from_string(const std::string& name) {
    if (name == "real")
        return Verdict::Real;
    if (name == "synthetic")
        return Verdict::Synthetic;
    raise(ErrorCode::InvalidParameter, "unknown label '" + name + "'");
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        raise(ErrorCode::IoError, "cannot open " + path + " for writing");
    return out;
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        raise(ErrorCode::IoError, "cannot open " + path);
    return in;
}

}  // namespace

json region_to_json(const PatchRegion& region) {
    return make_object({{"x", region.x},
                    {"y", region.y},
                    {"size", region.size},
                    {"aligned", region.aligned}});
}

PatchRegion region_from_json(const json& doc) {
    return PatchRegion{doc.at("x").get<int>(), doc.at("y").get<int>(),
                       doc.at("size").get<int>(), doc.value("aligned", false)};
}

json log_to_json(const AugmentationLog& log) {
    json steps = json::array();
    for (const auto& step : log) {
        json entry = make_object({{"op", step.op}, {"applied", step.applied}});
        for (const auto& [key, value] : step.params)
            entry[key] = value;
        steps.push_back(std::move(entry));
    }
    return steps;
}

AugmentationLog log_from_json(const json& doc) {
    AugmentationLog log;
    for (const auto& entry : doc) {
        AugmentationStep step;
        step.op = entry.at("op").get<std::string>();
        step.applied = entry.at("applied").get<bool>();
        for (const auto& [key, value] : entry.items())
            if (key != "op" && key != "applied")
                step.params[key] = value.get<double>();
        log.push_back(std::move(step));
    }
    return log;
}

json augmentation_config_to_json(const AugmentationConfig& config) {
    return make_object({
        {"hflip_prob", config.hflip_prob},
        {"vflip_prob", config.vflip_prob},
        {"rot90_prob", config.rot90_prob},
        {"hist_eq_prob", config.hist_eq_prob},
        {"blur_prob", config.blur_prob},
        {"brightness_prob", config.brightness_prob},
        {"contrast_prob", config.contrast_prob},
        {"color_prob", config.color_prob},
        {"saturation_prob", config.saturation_prob},
        {"down_up_prob", config.down_up_prob},
        {"jpeg_prob", config.jpeg_prob},
        {"jpeg_quality_min", config.jpeg_quality_min},
        {"jpeg_quality_max", config.jpeg_quality_max},
        {"blur_radius_min", config.blur_radius_min},
        {"blur_radius_max", config.blur_radius_max},
        {"brightness_delta", config.brightness_delta},
        {"contrast_delta", config.contrast_delta},
        {"color_delta", config.color_delta},
        {"saturation_delta", config.saturation_delta},
        {"downscale_min", config.downscale_min},
        {"downscale_max", config.downscale_max},
        {"seed", config.seed},
    });
}

AugmentationConfig augmentation_config_from_json(const json& doc) {
    AugmentationConfig config;
    config.hflip_prob = doc.value("hflip_prob", config.hflip_prob);
    config.vflip_prob = doc.value("vflip_prob", config.vflip_prob);
    config.rot90_prob = doc.value("rot90_prob", config.rot90_prob);
    config.hist_eq_prob = doc.value("hist_eq_prob", config.hist_eq_prob);
    config.blur_prob = doc.value("blur_prob", config.blur_prob);
    config.brightness_prob = doc.value("brightness_prob", config.brightness_prob);
    config.contrast_prob = doc.value("contrast_prob", config.contrast_prob);
    config.color_prob = doc.value("color_prob", config.color_prob);
    config.saturation_prob = doc.value("saturation_prob", config.saturation_prob);
    config.down_up_prob = doc.value("down_up_prob", config.down_up_prob);
    config.jpeg_prob = doc.value("jpeg_prob", config.jpeg_prob);
    config.jpeg_quality_min = doc.value("jpeg_quality_min", config.jpeg_quality_min);
    config.jpeg_quality_max = doc.value("jpeg_quality_max", config.jpeg_quality_max);
    config.blur_radius_min = doc.value("blur_radius_min", config.blur_radius_min);
    config.blur_radius_max = doc.value("blur_radius_max", config.blur_radius_max);
    config.brightness_delta = doc.value("brightness_delta", config.brightness_delta);
    config.contrast_delta = doc.value("contrast_delta", config.contrast_delta);
    config.color_delta = doc.value("color_delta", config.color_delta);
    config.saturation_delta = doc.value("saturation_delta", config.saturation_delta);
    config.downscale_min = doc.value("downscale_min", config.downscale_min);
    config.downscale_max = doc.value("downscale_max", config.downscale_max);
    config.seed = doc.value("seed", config.seed);
    config.validate();
    return config;
}

json recipe_to_json(const DatasetRecipe& recipe) {
    return make_object({
        {"id", recipe.id},
        {"categories", recipe.categories},
        {"generators", recipe.generators},
        {"order", recipe_order_name(recipe.order)},
        {"patches_per_image", recipe.patches_per_image},
        {"patch_size", recipe.patch_size},
        {"jpeg_enabled", recipe.jpeg_enabled},
        {"augmentation", augmentation_config_to_json(recipe.augmentation)},
    });
}

DatasetRecipe recipe_from_json(const json& doc) {
    DatasetRecipe recipe;
    recipe.id = doc.at("id").get<std::string>();
    recipe.categories = doc.value("categories", std::set<std::string>{});
    recipe.generators = doc.value("generators", std::set<std::string>{});
    const std::string order = doc.value("order", std::string("crop-then-augment"));
    if (order == "augment-then-crop")
        recipe.order = RecipeOrder::AugmentThenCrop;
    else if (order == "crop-then-augment")
        recipe.order = RecipeOrder::CropThenAugment;
    else
        raise(ErrorCode::InvalidParameter, "unknown recipe order '" + order + "'");
    recipe.patches_per_image = doc.value("patches_per_image", 1);
    recipe.patch_size = doc.value("patch_size", kDefaultPatchSize);
    recipe.jpeg_enabled = doc.value("jpeg_enabled", true);
    if (doc.contains("augmentation"))
        recipe.augmentation = augmentation_config_from_json(doc.at("augmentation"));
    return recipe;
}

json source_entry_to_json(const SourceEntry& entry) {
    return make_object({{"path", entry.path},
                    {"label", verdict_name(entry.label)},
                    {"generator", entry.generator},
                    {"category", entry.category}});
}

SourceEntry source_entry_from_json(const json& doc) {
    SourceEntry entry;
    entry.path = doc.at("path").get<std::string>();
    entry.label = label_from_string(doc.at("label").get<std::string>());
    entry.generator = doc.value("generator", std::string("none"));
    entry.category = doc.value("category", std::string());
    return entry;
}

SourceManifest read_source_manifest(const std::string& path) {
    auto in = open_for_read(path);
    SourceManifest manifest;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty())
            continue;
        try {
            manifest.entries.push_back(source_entry_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            raise(ErrorCode::InvalidParameter, path + ":" + std::to_string(line_number) +
                                                   ": bad manifest row: " + e.what());
        }
    }
    manifest.validate();
    return manifest;
}

void write_source_manifest(const std::string& path, const SourceManifest& manifest) {
    auto out = open_for_write(path);
    for (const auto& entry : manifest.entries)
        out << source_entry_to_json(entry).dump() << '\n';
}

json dataset_row_to_json(const DatasetRow& row) {
    json doc = make_object({{"source", row.source},
                        {"label", verdict_name(row.label)},
                        {"region", region_to_json(row.region)},
                        {"augmentation", log_to_json(row.log)}});
    if (!row.patch_file.empty())
        doc["patch"] = row.patch_file;
    return doc;
}

DatasetRow dataset_row_from_json(const json& doc) {
    DatasetRow row;
    row.source = doc.at("source").get<std::string>();
    row.label = label_from_string(doc.at("label").get<std::string>());
    row.region = region_from_json(doc.at("region"));
    row.log = log_from_json(doc.at("augmentation"));
    row.patch_file = doc.value("patch", std::string());
    return row;
}

void write_dataset_output(const std::string& path, const DatasetOutput& output) {
    auto out = open_for_write(path);
    for (const auto& row : output.rows)
        out << dataset_row_to_json(row).dump() << '\n';
}

DatasetOutput read_dataset_output(const std::string& path) {
    auto in = open_for_read(path);
    DatasetOutput output;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        output.rows.push_back(dataset_row_from_json(json::parse(line)));
    }
    return output;
}

json training_metadata_to_json(const TrainingConfigMetadata& metadata) {
    return make_object({
        {"train_split", metadata.train_split},
        {"val_split", metadata.val_split},
        {"optimizer", metadata.optimizer},
        {"optimizer_params", metadata.optimizer_params},
        {"initial_learning_rate", metadata.initial_learning_rate},
        {"plateau_decay_factor", metadata.plateau_decay_factor},
        {"plateau_patience_epochs", metadata.plateau_patience_epochs},
        {"early_stop_patience_epochs", metadata.early_stop_patience_epochs},
        {"max_epochs", metadata.max_epochs},
        {"loss", metadata.loss},
        {"backbone", metadata.backbone},
        {"weight_init", metadata.weight_init},
        {"patch_size", metadata.patch_size},
    });
}

json verdict_to_json(const std::string& image_path, const ImageVerdict& verdict) {
    json per_scorer = json::array();
    for (const auto& entry : verdict.per_scorer)
        per_scorer.push_back(make_object({{"id", entry.id},
                                      {"score", entry.score},
                                      {"policy", entry.policy.name()}}));
    return make_object({{"image", image_path},
                    {"fused_score", verdict.fused_score},
                    {"label", verdict_name(verdict.label)},
                    {"per_scorer", std::move(per_scorer)}});
}

json roc_to_json(const RocResult& roc) {
    json curve = json::array();
    for (const auto& point : roc.curve)
        curve.push_back(make_object({{"fpr", point.fpr}, {"tpr", point.tpr}}));
    return make_object({{"auc", roc.auc},
                    {"tpr_at_zero", roc.tpr_at_zero},
                    {"fpr_at_zero", roc.fpr_at_zero},
                    {"curve", std::move(curve)}});
}

json confusion_to_json(const ConfusionResult& confusion) {
    return make_object({
        {"tpr", confusion.tpr},
        {"fpr", confusion.fpr},
        {"true_positives", confusion.counts.true_positives},
        {"false_positives", confusion.counts.false_positives},
        {"true_negatives", confusion.counts.true_negatives},
        {"false_negatives", confusion.counts.false_negatives},
    });
}

json histogram_to_json(const HistogramResult& hist) {
    return make_object({{"min", hist.min},
                    {"max", hist.max},
                    {"bin_width", hist.bin_width},
                    {"real", hist.real_counts},
                    {"synthetic", hist.synthetic_counts}});
}

json orthogonality_to_json(const OrthogonalityReport& report) {
    json pairs = json::array();
    for (const auto& pair : report.pairs)
        pairs.push_back(make_object({
            {"first", pair.first},
            {"second", pair.second},
            {"semantic", pair.conditions.semantic},
            {"processing_order", pair.conditions.processing_order},
            {"jpeg", pair.conditions.jpeg},
            {"generators", pair.conditions.generators},
            {"orthogonal", pair.conditions.any()},
        }));
    return make_object({{"pairs", std::move(pairs)}});
}

std::string roc_curve_to_csv(const RocResult& roc) {
    std::ostringstream out;
    out << "fpr,tpr\n";
    for (const auto& point : roc.curve)
        out << point.fpr << ',' << point.tpr << '\n';
    return out.str();
}

std::string histogram_to_csv(const HistogramResult& hist) {
    std::ostringstream out;
    out << "bin_low,bin_high,real,synthetic\n";
    for (std::size_t i = 0; i < hist.real_counts.size(); ++i) {
        const double low = hist.min + hist.bin_width * static_cast<double>(i);
        const double high = i + 1 == hist.real_counts.size()
                                ? hist.max
                                : hist.min + hist.bin_width * static_cast<double>(i + 1);
        out << low << ',' << high << ',' << hist.real_counts[i] << ','
            << hist.synthetic_counts[i] << '\n';
    }
    return out.str();
}

std::string policy_rows_to_csv(const std::vector<PolicyComparisonRow>& rows) {
    std::ostringstream out;
    out << "policy,auc,tpr,fpr\n";
    for (const auto& row : rows)
        out << row.policy.name() << ',' << row.auc << ',' << row.tpr << ',' << row.fpr << '\n';
    return out.str();
}

json policy_rows_to_json(const std::vector<PolicyComparisonRow>& rows) {
    json doc = json::array();
    for (const auto& row : rows)
        doc.push_back(make_object({{"policy", row.policy.name()},
                               {"auc", row.auc},
                               {"tpr", row.tpr},
                               {"fpr", row.fpr}}));
    return doc;
}

SimulationSpec simulation_spec_from_json(const json& doc) {
    SimulationSpec spec;
    spec.images_per_class = doc.value("images_per_class", spec.images_per_class);
    spec.patches_per_image = doc.value("patches_per_image", spec.patches_per_image);
    spec.mu_real = doc.value("mu_real", spec.mu_real);
    spec.mu_synthetic = doc.value("mu_synthetic", spec.mu_synthetic);
    spec.sigma = doc.value("sigma", spec.sigma);
    spec.signal_fraction = doc.value("signal_fraction", spec.signal_fraction);
    spec.seed = doc.value("seed", spec.seed);
    spec.validate();
    return spec;
}

json simulation_spec_to_json(const SimulationSpec& spec) {
    return make_object({
        {"images_per_class", spec.images_per_class},
        {"patches_per_image", spec.patches_per_image},
        {"mu_real", spec.mu_real},
        {"mu_synthetic", spec.mu_synthetic},
        {"sigma", spec.sigma},
        {"signal_fraction", spec.signal_fraction},
        {"seed", spec.seed},
    });
}

AnalyticScorerSpec analytic_spec_from_json(const json& doc, int patch_size) {
    AnalyticScorerSpec spec;
    spec.id = doc.value("id", std::string());
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "constant") {
        spec.kind = AnalyticScorerSpec::Kind::ConstantScore;
        spec.value = doc.at("value").get<double>();
    } else if (kind == "luma_threshold") {
        spec.kind = AnalyticScorerSpec::Kind::LumaThreshold;
        spec.pivot = doc.value("pivot", 0.5);
        spec.gain = doc.value("gain", 1.0);
    } else if (kind == "planted_signal") {
        spec.kind = AnalyticScorerSpec::Kind::PlantedSignal;
        spec.gain = doc.value("gain", 1.0);
        const std::string pattern = doc.value("pattern", std::string("checker"));
        if (pattern == "checker")
            spec.pattern = make_checker_image(patch_size, patch_size,
                                              doc.value("period", kJpegGridStep));
        else
            raise(ErrorCode::ConfigError, "unknown planted-signal pattern '" + pattern + "'");
    } else {
        raise(ErrorCode::ConfigError, "unknown analytic scorer kind '" + kind + "'");
    }
    return spec;
}

}  // namespace patchdet
