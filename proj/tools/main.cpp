#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "patchdet/aggregation.hpp"
#include "patchdet/codec.hpp"
#include "patchdet/ensemble_config.hpp"
#include "patchdet/error.hpp"
#include "patchdet/evaluation.hpp"
#include "patchdet/parallel.hpp"
#include "patchdet/recipes.hpp"
#include "patchdet/rng.hpp"
#include "patchdet/serialization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace patchdet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDataError = 2;

/// Writes either to stdout ("-") or to a file; primary outputs go through
/// here so every command has the same sink behavior.
class OutputSink {
public:
    explicit OutputSink(const std::string& path) {
        if (path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_)
                raise(ErrorCode::IoError, "cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

bool has_image_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::string> collect_image_paths(const std::vector<std::string>& inputs) {
    std::vector<std::string> paths;
    for (const auto& input : inputs) {
        if (fs::is_directory(input)) {
            for (const auto& entry : fs::directory_iterator(input))
                if (entry.is_regular_file() && has_image_extension(entry.path()))
                    paths.push_back(entry.path().string());
        } else {
            paths.push_back(input);
        }
    }
    std::sort(paths.begin(), paths.end());
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
    return paths;
}

int map_error_exit(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ConfigError:
        case ErrorCode::SpecError:
        case ErrorCode::UnknownRecipe:
        case ErrorCode::EmptyAfterFilter:
        case ErrorCode::InvalidParameter:
        case ErrorCode::ModelLoadError:
        case ErrorCode::ShapeMismatch:
            return kExitConfigError;
        default:
            return kExitDataError;
    }
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
    std::vector<std::string> inputs;
    std::string config_path;
    std::string output = "-";
    std::uint64_t seed = 0;
    double threshold = 0.0;
    int patches_per_scorer = 0;  // 0 = keep config values
    int workers = 0;             // 0 = hardware concurrency
};

int run_detect(const DetectArgs& args) {
    EnsembleConfig ensemble;
    try {
        if (!args.config_path.empty()) {
            ensemble = load_ensemble_config_file(args.config_path);
        } else {
            const char* model_dir = std::getenv("PATCHDET_MODEL_DIR");
            ensemble = default_ensemble_config(model_dir ? model_dir : "");
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    ensemble.threshold = args.threshold;
    if (args.patches_per_scorer > 0)
        for (auto& member : ensemble.members)
            member.sampling.count = args.patches_per_scorer;

    const auto paths = collect_image_paths(args.inputs);
    if (paths.empty()) {
        std::cerr << "error: no input images\n";
        return kExitConfigError;
    }

    struct Row {
        json record;
        bool failed = false;
    };
    std::vector<Row> rows(paths.size());
    const int workers = args.workers > 0
                            ? args.workers
                            : static_cast<int>(std::thread::hardware_concurrency());

    parallel_for(paths.size(), workers, [&](std::size_t index) {
        const auto& path = paths[index];
        try {
            const DecodedImage decoded = load_image(path);
            if (decoded.source_channels != 3)
                std::cerr << "note: " << path << " converted to RGB (had "
                          << decoded.source_channels << " channel(s))\n";
            const ImageVerdict verdict =
                run_ensemble(decoded.image, ensemble, derive_seed(args.seed, path));
            rows[index].record = verdict_to_json(path, verdict);
        } catch (const std::exception& e) {
            std::cerr << "warning: " << path << " skipped: " << e.what() << "\n";
            rows[index].record = json{{"image", path}, {"error", e.what()}};
            rows[index].failed = true;
        }
    });

    OutputSink sink(args.output);
    bool any_failed = false;
    for (const auto& row : rows) {
        sink.stream() << row.record.dump() << '\n';
        any_failed = any_failed || row.failed;
    }
    return any_failed ? kExitDataError : kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string scores_path;
    std::string labels_path;
    std::string output = "-";
    std::string roc_csv;
    std::string hist_csv;
    int bins = 50;
    double threshold = 0.0;
    std::string group_by = "group";
};

struct GroupedSamples {
    std::vector<LabeledScore> all;
    std::map<std::string, std::vector<LabeledScore>> groups;
};

GroupedSamples read_labeled_scores(const EvaluateArgs& args) {
    std::map<std::string, Verdict> external_labels;
    if (!args.labels_path.empty()) {
        std::ifstream in(args.labels_path);
        if (!in)
            raise(ErrorCode::IoError, "cannot open " + args.labels_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            const json doc = json::parse(line);
            external_labels[doc.at("id").get<std::string>()] =
                doc.at("label").get<std::string>() == "synthetic" ? Verdict::Synthetic
                                                                  : Verdict::Real;
        }
    }

    std::ifstream in(args.scores_path);
    if (!in)
        raise(ErrorCode::IoError, "cannot open " + args.scores_path);

    GroupedSamples samples;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty())
            continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            raise(ErrorCode::SpecError, args.scores_path + ":" + std::to_string(line_number) +
                                            ": not JSON: " + e.what());
        }
        LabeledScore sample;
        sample.score = doc.at("score").get<double>();
        if (doc.contains("label")) {
            sample.truth = doc.at("label").get<std::string>() == "synthetic"
                               ? Verdict::Synthetic
                               : Verdict::Real;
        } else if (doc.contains("id")) {
            const auto it = external_labels.find(doc.at("id").get<std::string>());
            if (it == external_labels.end())
                raise(ErrorCode::SpecError,
                      args.scores_path + ":" + std::to_string(line_number) +
                          ": no label for id " + doc.at("id").get<std::string>());
            sample.truth = it->second;
        } else {
            raise(ErrorCode::SpecError, args.scores_path + ":" + std::to_string(line_number) +
                                            ": row has neither label nor id");
        }
        samples.all.push_back(sample);
        if (doc.contains(args.group_by))
            samples.groups[doc.at(args.group_by).get<std::string>()].push_back(sample);
    }
    require(!samples.all.empty(), ErrorCode::SpecError,
            args.scores_path + " holds no score rows");
    return samples;
}

json evaluate_block(const std::vector<LabeledScore>& samples, double threshold, int bins) {
    try {
        const RocResult roc = compute_auc(samples);
        json block = roc_to_json(roc);
        block["confusion"] = confusion_to_json(confusion_at(samples, threshold));
        block["histogram"] = histogram_to_json(histogram(samples, bins));
        block["samples"] = samples.size();
        return block;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingleClass)
            throw;
        return json{{"error", e.what()}, {"samples", samples.size()}};
    }
}

int run_evaluate(const EvaluateArgs& args) {
    const GroupedSamples samples = read_labeled_scores(args);

    json report;
    report["global"] = evaluate_block(samples.all, args.threshold, args.bins);
    if (!samples.groups.empty()) {
        json groups = json::object();
        for (const auto& [name, group_samples] : samples.groups)
            groups[name] = evaluate_block(group_samples, args.threshold, args.bins);
        report["groups"] = std::move(groups);
    }

    if (!args.roc_csv.empty() && !report["global"].contains("error")) {
        OutputSink roc_sink(args.roc_csv);
        roc_sink.stream() << roc_curve_to_csv(compute_auc(samples.all));
    }
    if (!args.hist_csv.empty()) {
        OutputSink hist_sink(args.hist_csv);
        hist_sink.stream() << histogram_to_csv(histogram(samples.all, args.bins));
    }

    OutputSink sink(args.output);
    sink.stream() << report.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// build-dataset
// ---------------------------------------------------------------------------

struct BuildDatasetArgs {
    std::string recipe_id;
    std::string recipe_file;
    std::string manifest_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool write_patches = false;
    bool d4_ideal = false;
    int workers = 0;
};

int run_build_dataset(const BuildDatasetArgs& args) {
    DatasetRecipe recipe;
    if (!args.recipe_file.empty()) {
        std::ifstream in(args.recipe_file);
        if (!in)
            raise(ErrorCode::ConfigError, "cannot open recipe file " + args.recipe_file);
        json doc;
        in >> doc;
        recipe = recipe_from_json(doc);
    } else if (!args.recipe_id.empty()) {
        recipe = builtin_recipe(args.recipe_id, args.d4_ideal);
    } else {
        raise(ErrorCode::ConfigError, "either --recipe or --recipe-file is required");
    }

    const SourceManifest manifest = read_source_manifest(args.manifest_path);

    fs::create_directories(args.output_dir);
    const fs::path out_dir(args.output_dir);

    MaterializeOptions options;
    options.workers = args.workers > 0
                          ? args.workers
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (args.write_patches) {
        fs::create_directories(out_dir / "patches");
        options.patch_sink = [&out_dir](std::size_t row_index, const DatasetRow&,
                                        const ImageBuffer& patch) {
            char name[32];
            std::snprintf(name, sizeof(name), "patches/row_%06zu.png", row_index);
            png_write_file((out_dir / name).string(), patch);
            return std::string(name);
        };
    }

    const ImageLoader loader = [](const std::string& path) {
        DecodedImage decoded = load_image(path);
        if (decoded.source_channels != 3)
            std::cerr << "note: " << path << " converted to RGB (had "
                      << decoded.source_channels << " channel(s))\n";
        return std::move(decoded.image);
    };

    const DatasetOutput output = materialize(recipe, manifest, args.seed, loader, options);

    write_dataset_output((out_dir / "dataset.jsonl").string(), output);
    {
        std::ofstream sidecar(out_dir / "training_config.json");
        sidecar << training_metadata_to_json(TrainingConfigMetadata{}).dump(2) << '\n';
    }
    {
        std::ofstream recipe_out(out_dir / "recipe.json");
        recipe_out << recipe_to_json(recipe).dump(2) << '\n';
    }
    std::cerr << "wrote " << output.rows.size() << " rows to "
              << (out_dir / "dataset.jsonl").string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string spec_path;
    std::string policies = "alarm-any,mean,median";
    std::string output = "-";
    bool csv = false;
    std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args) {
    SimulationSpec spec;
    if (!args.spec_path.empty()) {
        std::ifstream in(args.spec_path);
        if (!in)
            raise(ErrorCode::SpecError, "cannot open simulation spec " + args.spec_path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            raise(ErrorCode::SpecError,
                  "malformed simulation spec " + args.spec_path + ": " + e.what());
        }
        spec = simulation_spec_from_json(doc);
    }
    if (args.seed)
        spec.seed = *args.seed;

    std::vector<AggregationPolicy> policies;
    std::stringstream tokens(args.policies);
    std::string token;
    while (std::getline(tokens, token, ','))
        if (!token.empty())
            policies.push_back(AggregationPolicy::parse(token));

    const auto rows = simulate_policy_comparison(spec, policies);

    OutputSink sink(args.output);
    const bool as_csv = args.csv || args.output.ends_with(".csv");
    if (as_csv)
        sink.stream() << policy_rows_to_csv(rows);
    else
        sink.stream() << json{{"spec", simulation_spec_to_json(spec)},
                              {"results", policy_rows_to_json(rows)}}
                             .dump(2)
                      << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Patch-based synthetic-image detection toolkit"};
    app.require_subcommand(1);

    DetectArgs detect_args;
    auto* detect = app.add_subcommand(
        "detect", "Score images with a patch-scorer ensemble and emit verdicts");
    detect->add_option("inputs", detect_args.inputs, "Image files or directories")->required();
    detect->add_option("--config", detect_args.config_path,
                       "Ensemble config JSON (default: $PATCHDET_MODEL_DIR models)");
    detect->add_option("--output", detect_args.output, "Verdict JSONL path or - for stdout");
    detect->add_option("--seed", detect_args.seed, "Global sampling seed");
    detect->add_option("--threshold", detect_args.threshold, "Decision threshold");
    detect->add_option("--patches-per-scorer", detect_args.patches_per_scorer,
                       "Override each scorer's patch count");
    detect->add_option("--workers", detect_args.workers, "Worker threads (default: hardware)");

    EvaluateArgs evaluate_args;
    auto* evaluate =
        app.add_subcommand("evaluate", "Compute ROC/AUC and confusion from labeled scores");
    evaluate->add_option("scores", evaluate_args.scores_path, "Labeled score JSONL file")
        ->required();
    evaluate->add_option("--labels", evaluate_args.labels_path,
                         "External labels JSONL ({id,label}) joined on row ids");
    evaluate->add_option("--output", evaluate_args.output, "Metrics JSON path or -");
    evaluate->add_option("--roc-csv", evaluate_args.roc_csv, "Write the global ROC curve CSV");
    evaluate->add_option("--hist-csv", evaluate_args.hist_csv,
                         "Write the global score histogram CSV");
    evaluate->add_option("--bins", evaluate_args.bins, "Histogram bin count");
    evaluate->add_option("--threshold", evaluate_args.threshold, "Confusion threshold");
    evaluate->add_option("--group-by", evaluate_args.group_by,
                         "Row field to group per-scenario metrics by");

    BuildDatasetArgs build_args;
    auto* build = app.add_subcommand("build-dataset",
                                     "Materialize a training dataset from a source manifest");
    build->add_option("--recipe", build_args.recipe_id, "Built-in recipe id (D1..D5)");
    build->add_option("--recipe-file", build_args.recipe_file, "Custom recipe JSON file");
    build->add_option("--manifest", build_args.manifest_path, "Source manifest JSONL")
        ->required();
    build->add_option("--output", build_args.output_dir, "Output directory")->required();
    build->add_option("--seed", build_args.seed, "Materialization seed");
    build->add_flag("--write-patches", build_args.write_patches, "Also write patch PNGs");
    build->add_flag("--d4-ideal", build_args.d4_ideal,
                    "Use the metfaces-only variant of recipe D4");
    build->add_option("--workers", build_args.workers, "Worker threads (default: hardware)");

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand(
        "simulate", "Compare aggregation policies on synthetic score distributions");
    simulate->add_option("--spec", simulate_args.spec_path, "Simulation spec JSON file");
    simulate->add_option("--policies", simulate_args.policies,
                         "Comma list: alarm-any, alarm-count:<k>, mean, median");
    simulate->add_option("--output", simulate_args.output, "Output path or -");
    simulate->add_flag("--csv", simulate_args.csv, "Emit CSV instead of JSON");
    std::uint64_t simulate_seed = 0;
    auto* seed_opt = simulate->add_option("--seed", simulate_seed, "Override the spec seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*detect)
            return run_detect(detect_args);
        if (*evaluate)
            return run_evaluate(evaluate_args);
        if (*build)
            return run_build_dataset(build_args);
        if (*simulate) {
            if (*seed_opt)
                simulate_args.seed = simulate_seed;
            return run_simulate(simulate_args);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return map_error_exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitConfigError;
}
