#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "patchdet/error.hpp"
#include "patchdet/serialization.hpp"

using namespace patchdet;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("regions serialize with the documented field names") {
    const PatchRegion region{8, 16, 128, true};
    const json doc = region_to_json(region);
    CHECK(doc.at("x") == 8);
    CHECK(doc.at("y") == 16);
    CHECK(doc.at("size") == 128);
    CHECK(doc.at("aligned") == true);
    CHECK(region_from_json(doc) == region);
}

TEST_CASE("augmentation logs survive a JSON round-trip and still replay") {
    const ImageBuffer image = make_textured_image(48, 48, 21);
    AugmentationConfig config;
    config.seed = 4;
    const auto result = apply_pipeline(image, config);
    const AugmentationLog restored = log_from_json(log_to_json(result.log));
    CHECK(restored == result.log);
    CHECK(replay_log(image, restored) == result.image);
}

TEST_CASE("verdict records expose the documented shape") {
    ImageVerdict verdict;
    verdict.fused_score = -0.25;
    verdict.label = Verdict::Real;
    verdict.per_scorer.push_back({"cnn-d1", -0.5, AggregationPolicy::alarm_any()});
    verdict.per_scorer.push_back({"cnn-d2", 0.0, AggregationPolicy::mean()});

    const json doc = verdict_to_json("samples/img.png", verdict);
    CHECK(doc.at("image") == "samples/img.png");
    CHECK(doc.at("fused_score") == -0.25);
    CHECK(doc.at("label") == "real");
    REQUIRE(doc.at("per_scorer").size() == 2);
    CHECK(doc.at("per_scorer")[0].at("id") == "cnn-d1");
    CHECK(doc.at("per_scorer")[0].at("score") == -0.5);
    CHECK(doc.at("per_scorer")[0].at("policy") == "alarm-any");
}

TEST_CASE("source manifests round-trip through JSONL files") {
    SourceManifest manifest;
    SourceEntry real;
    real.path = "data/real_1.png";
    real.category = "ffhq";
    manifest.entries.push_back(real);
    SourceEntry fake;
    fake.path = "data/fake_1.png";
    fake.label = Verdict::Synthetic;
    fake.generator = "stylegan2";
    fake.category = "afhq2";
    manifest.entries.push_back(fake);

    const auto path = fs::temp_directory_path() / "patchdet_manifest_test.jsonl";
    write_source_manifest(path.string(), manifest);
    const SourceManifest restored = read_source_manifest(path.string());
    REQUIRE(restored.entries.size() == 2);
    CHECK(restored.entries[1].generator == "stylegan2");
    CHECK(restored.entries[1].label == Verdict::Synthetic);
    CHECK(restored.entries[0].category == "ffhq");
    std::remove(path.string().c_str());
}

TEST_CASE("dataset rows round-trip through JSON") {
    DatasetRow row;
    row.source = "x.png";
    row.label = Verdict::Synthetic;
    row.region = {16, 24, 32, true};
    row.log.push_back({"hflip", true, {}});
    row.log.push_back({"jpeg", true, {{"quality", 65.0}}});
    row.patch_file = "patches/row_000001.png";

    const DatasetRow restored = dataset_row_from_json(dataset_row_to_json(row));
    CHECK(restored.source == row.source);
    CHECK(restored.label == row.label);
    CHECK(restored.region == row.region);
    CHECK(restored.log == row.log);
    CHECK(restored.patch_file == row.patch_file);
}

TEST_CASE("training metadata carries the published schedule") {
    const json doc = training_metadata_to_json(TrainingConfigMetadata{});
    CHECK(doc.at("train_split") == 0.8);
    CHECK(doc.at("val_split") == 0.2);
    CHECK(doc.at("optimizer") == "adam");
    CHECK(doc.at("initial_learning_rate") == 0.001);
    CHECK(doc.at("plateau_decay_factor") == 10.0);
    CHECK(doc.at("plateau_patience_epochs") == 10);
    CHECK(doc.at("early_stop_patience_epochs") == 20);
    CHECK(doc.at("max_epochs") == 500);
    CHECK(doc.at("backbone") == "efficientnet-b4");
    CHECK(doc.at("patch_size") == 128);
}

TEST_CASE("analytic scorer specs parse from JSON") {
    const auto constant = analytic_spec_from_json({{"kind", "constant"}, {"value", -2.0}}, 16);
    CHECK(constant.kind == AnalyticScorerSpec::Kind::ConstantScore);
    CHECK(constant.value == -2.0);

    const auto luma = analytic_spec_from_json(
        {{"kind", "luma_threshold"}, {"pivot", 0.3}, {"gain", 4.0}, {"id", "bright"}}, 16);
    CHECK(luma.kind == AnalyticScorerSpec::Kind::LumaThreshold);
    CHECK(luma.id == "bright");

    const auto planted = analytic_spec_from_json(
        {{"kind", "planted_signal"}, {"pattern", "checker"}, {"period", 4}, {"gain", 1.5}}, 24);
    CHECK(planted.pattern.width() == 24);
    CHECK(planted.pattern.at(0, 0, 0) != planted.pattern.at(4, 0, 0));

    CHECK_THROWS_AS(analytic_spec_from_json({{"kind", "mystery"}}, 16), Error);
}

TEST_CASE("simulation specs parse with defaults and validate") {
    const SimulationSpec spec = simulation_spec_from_json({{"seed", 3}});
    CHECK(spec.images_per_class == 500);
    CHECK(spec.signal_fraction == 0.1);
    CHECK(spec.seed == 3);
    CHECK_THROWS_AS(simulation_spec_from_json({{"sigma", -1.0}}), Error);
}

TEST_CASE("augmentation configs round-trip through JSON") {
    AugmentationConfig config;
    config.jpeg_prob = 0.0;
    config.blur_radius_max = 2;
    config.seed = 17;
    CHECK(augmentation_config_from_json(augmentation_config_to_json(config)) == config);
}
