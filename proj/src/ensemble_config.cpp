#include "patchdet/ensemble_config.hpp"

#include <filesystem>
#include <fstream>

#include "patchdet/error.hpp"
#include "patchdet/serialization.hpp"

namespace patchdet {

using nlohmann::json;

namespace {

SamplingPolicy sampling_from_json(const json& doc, int patch_size) {
    SamplingPolicy policy;
    const std::string mode = doc.value("mode", std::string("random"));
    if (mode == "random")
        policy.mode = SamplingMode::Random;
    else if (mode == "grid-aligned")
        policy.mode = SamplingMode::GridAligned;
    else
        raise(ErrorCode::ConfigError, "unknown sampling mode '" + mode + "'");
    policy.count = doc.value("count", policy.mode == SamplingMode::Random ? 200 : 180);
    policy.size = patch_size;
    require(policy.count >= 1, ErrorCode::ConfigError, "sampling count must be >= 1");
    return policy;
}

EnsembleConfig load_ensemble_config_checked(const json& doc) {
    EnsembleConfig config;
    const int patch_size = doc.value("patch_size", kDefaultPatchSize);
    require(patch_size >= 1, ErrorCode::ConfigError, "patch_size must be >= 1");
    config.threshold = doc.value("threshold", 0.0);

    if (!doc.contains("scorers") || !doc.at("scorers").is_array() || doc.at("scorers").empty())
        raise(ErrorCode::ConfigError, "ensemble config needs a non-empty 'scorers' array");

    for (const auto& scorer_doc : doc.at("scorers")) {
        EnsembleMember member;

        if (scorer_doc.contains("backend")) {
            const auto& backend = scorer_doc.at("backend");
            ModelBackendConfig model;
            model.model_path = backend.at("model_path").get<std::string>();
            model.input_size = patch_size;
            if (backend.contains("normalization")) {
                model.channel_mean =
                    backend.at("normalization").at("mean").get<std::vector<double>>();
                model.channel_std =
                    backend.at("normalization").at("std").get<std::vector<double>>();
            }
            const std::string convention =
                backend.value("output_convention", std::string("logit"));
            if (convention == "logit")
                model.output_convention = OutputConvention::Logit;
            else if (convention == "class_pair_diff")
                model.output_convention = OutputConvention::ClassPairDiff;
            else
                raise(ErrorCode::ConfigError,
                      "unknown output convention '" + convention + "'");
            if (scorer_doc.contains("id"))
                model.id = scorer_doc.at("id").get<std::string>();
            member.scorer = load_model_backend(model);
        } else if (scorer_doc.contains("analytic")) {
            AnalyticScorerSpec spec = analytic_spec_from_json(scorer_doc.at("analytic"),
                                                              patch_size);
            if (scorer_doc.contains("id"))
                spec.id = scorer_doc.at("id").get<std::string>();
            member.scorer = make_analytic_scorer(spec);
        } else {
            raise(ErrorCode::ConfigError,
                  "each scorer needs either a 'backend' or an 'analytic' section");
        }

        member.sampling = scorer_doc.contains("sampling")
                              ? sampling_from_json(scorer_doc.at("sampling"), patch_size)
                              : SamplingPolicy{SamplingMode::Random, 200, patch_size, 0};
        member.aggregation =
            AggregationPolicy::parse(scorer_doc.value("aggregation", std::string("alarm-any")));
        config.members.push_back(std::move(member));
    }
    return config;
}

}  // namespace

EnsembleConfig load_ensemble_config(const json& doc) {
    try {
        return load_ensemble_config_checked(doc);
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigError, std::string("invalid ensemble config: ") + e.what());
    }
}

EnsembleConfig load_ensemble_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        raise(ErrorCode::ConfigError, "cannot open ensemble config " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigError, "malformed ensemble config " + path + ": " + e.what());
    }
    try {
        return load_ensemble_config(doc);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ConfigError)
            throw;
        raise(ErrorCode::ConfigError, path + ": " + e.message());
    }
}

EnsembleConfig default_ensemble_config(const std::string& model_dir) {
    require(!model_dir.empty(), ErrorCode::ConfigError,
            "no ensemble config given and no model directory set");
    json scorers = json::array();
    for (int index = 1; index <= 5; ++index) {
        const auto path =
            (std::filesystem::path(model_dir) / ("d" + std::to_string(index) + ".json"))
                .string();
        scorers.push_back({
            {"id", "cnn-d" + std::to_string(index)},
            {"backend", {{"model_path", path}}},
            {"sampling",
             {{"mode", index == 1 ? "random" : "grid-aligned"},
              {"count", index == 1 ? 200 : 180}}},
            {"aggregation", "alarm-any"},
        });
    }
    return load_ensemble_config({{"patch_size", kDefaultPatchSize}, {"scorers", scorers}});
}

}  // namespace patchdet
