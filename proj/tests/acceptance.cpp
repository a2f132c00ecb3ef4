// Acceptance suite: one check per release criterion, each printed as a
// single PASS/FAIL line with its runtime. Exits non-zero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "patchdet/aggregation.hpp"
#include "patchdet/augmentation.hpp"
#include "patchdet/codec.hpp"
#include "patchdet/error.hpp"
#include "patchdet/evaluation.hpp"
#include "patchdet/patching.hpp"
#include "patchdet/recipes.hpp"
#include "patchdet/rng.hpp"
#include "patchdet/serialization.hpp"

using namespace patchdet;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool condition, const std::string& message) {
    if (!condition)
        throw CheckFailure(message);
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

// --------------------------------------------------------------------------
// 1. Patch aggregation equals a brute-force oracle on random vectors.
// --------------------------------------------------------------------------

void check_aggregation_oracle() {
    Rng rng(2026);
    for (int trial = 0; trial < 1000; ++trial) {
        const int len = rng.uniform_int(1, 256);
        std::vector<double> scores(static_cast<std::size_t>(len));
        for (auto& s : scores)
            s = rng.uniform_double(-5.0, 5.0);
        if (rng.bernoulli(0.3))  // force some all-negative vectors
            for (auto& s : scores)
                s = -std::abs(s) - 1e-9;

        bool all_negative = true;
        double mn = scores[0], mx = scores[0];
        for (double s : scores) {
            all_negative = all_negative && s < 0.0;
            mn = std::min(mn, s);
            mx = std::max(mx, s);
        }
        const double oracle = all_negative ? mn : mx;
        const double got = aggregate(scores, AggregationPolicy::alarm_any());
        expect(got == oracle, "aggregate mismatch at trial " + std::to_string(trial) + ": got " +
                                  format_double(got) + ", oracle " + format_double(oracle));
        expect(aggregate(scores, AggregationPolicy::alarm_count(1)) == oracle,
               "alarm-count:1 deviates from alarm-any at trial " + std::to_string(trial));
    }
}

// --------------------------------------------------------------------------
// 2. AUC equals O(n^2) Mann-Whitney pair counting within 1e-12.
// --------------------------------------------------------------------------

double auc_pair_oracle(const std::vector<LabeledScore>& samples) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (const auto& s : samples) {
        if (s.truth != Verdict::Synthetic)
            continue;
        for (const auto& r : samples) {
            if (r.truth != Verdict::Real)
                continue;
            ++pairs;
            wins += s.score > r.score ? 1.0 : (s.score == r.score ? 0.5 : 0.0);
        }
    }
    return wins / static_cast<double>(pairs);
}

void check_auc_oracle() {
    Rng rng(777);
    for (int set = 0; set < 100; ++set) {
        const int n = rng.uniform_int(2, 500);
        std::vector<LabeledScore> samples;
        samples.push_back({rng.uniform_double(-2.0, 2.0), Verdict::Real});
        samples.push_back({rng.uniform_double(-2.0, 2.0), Verdict::Synthetic});
        for (int i = 2; i < n; ++i)
            samples.push_back({rng.uniform_int(-10, 10) / 3.0,  // quantized: ties guaranteed
                               rng.bernoulli(0.5) ? Verdict::Synthetic : Verdict::Real});
        const double fast = compute_auc(samples).auc;
        const double slow = auc_pair_oracle(samples);
        expect(std::abs(fast - slow) <= 1e-12,
               "AUC mismatch on set " + std::to_string(set) + ": " + format_double(fast) +
                   " vs " + format_double(slow));
    }
}

// --------------------------------------------------------------------------
// 3. Grid alignment of sampling and of D2 materialization.
// --------------------------------------------------------------------------

void check_grid_alignment() {
    Rng rng(5150);
    for (int trial = 0; trial < 10; ++trial) {
        const int w = rng.uniform_int(160, 640);
        const int h = rng.uniform_int(160, 640);
        const ImageBuffer image(w, h);
        const auto regions =
            sample_patches(image, {SamplingMode::GridAligned, 180, 128, rng.next_u64()});
        expect(!regions.empty(), "grid sampling returned nothing");
        for (const auto& region : regions)
            expect(region.x % 8 == 0 && region.y % 8 == 0,
                   "misaligned grid region at trial " + std::to_string(trial));
    }

    DatasetRecipe d2 = builtin_recipe("D2");
    SourceManifest manifest;
    const char* categories[] = {"ffhq", "metfaces", "afhq2"};
    for (int i = 0; i < 12; ++i) {
        SourceEntry entry;
        entry.path = "img_" + std::to_string(i) + ".png";
        entry.label = i % 2 == 0 ? Verdict::Real : Verdict::Synthetic;
        entry.generator = i % 2 == 0 ? "none" : "stylegan2";
        entry.category = categories[i % 3];
        manifest.entries.push_back(entry);
    }
    const ImageLoader loader = [](const std::string& path) {
        return make_textured_image(256, 256, hash64(path));
    };
    const DatasetOutput output = materialize(d2, manifest, 99, loader);
    expect(!output.rows.empty(), "D2 materialization produced no rows");
    for (const auto& row : output.rows)
        expect(row.region.x % 8 == 0 && row.region.y % 8 == 0 && row.region.aligned,
               "D2 row off the JPEG grid: " + row.source);

    const ImageBuffer big(1024, 1024);
    const auto random_regions = sample_patches(big, {SamplingMode::Random, 200, 128, 7});
    expect(random_regions.size() == 200, "random draw returned wrong count");
    bool any_misaligned = false;
    for (const auto& region : random_regions)
        any_misaligned = any_misaligned || region.x % 8 != 0 || region.y % 8 != 0;
    expect(any_misaligned, "200-patch random draw landed entirely on the 8x8 grid");
}

// --------------------------------------------------------------------------
// 4. Augmentation gate frequencies over 20k seeded runs.
// --------------------------------------------------------------------------

void check_augmentation_frequencies() {
    const ImageBuffer image = make_textured_image(64, 64, 2024);
    const AugmentationConfig config;
    std::map<std::string, int> applied;
    const int runs = 20000;
    const Rng root(31415);
    for (int i = 0; i < runs; ++i) {
        Rng stream = root.derive(static_cast<std::uint64_t>(i));
        const AugmentationResult result = apply_pipeline(image, config, stream);
        for (const auto& step : result.log)
            applied[step.op] += step.applied ? 1 : 0;
    }
    expect(applied.size() == 11, "expected 11 pipeline operations");
    for (const auto& [op, count] : applied) {
        const double rate = static_cast<double>(count) / runs;
        const double lo = op == "jpeg" ? 0.68 : 0.48;
        const double hi = op == "jpeg" ? 0.72 : 0.52;
        expect(rate >= lo && rate <= hi,
               op + " applied at rate " + format_double(rate) + ", outside [" +
                   format_double(lo) + ", " + format_double(hi) + "]");
    }
}

// --------------------------------------------------------------------------
// 5. Policy ordering on localized signal, and the k trade-off.
// --------------------------------------------------------------------------

void check_policy_ordering() {
    SimulationSpec spec;
    spec.images_per_class = 500;
    spec.patches_per_image = 100;
    spec.mu_real = -2.0;
    spec.mu_synthetic = 2.0;
    spec.sigma = 0.5;
    spec.signal_fraction = 0.1;
    spec.seed = 7;

    const auto rows = simulate_policy_comparison(
        spec, {AggregationPolicy::alarm_any(), AggregationPolicy::mean(),
               AggregationPolicy::median()});
    expect(rows[0].auc > rows[1].auc,
           "alarm-any AUC " + format_double(rows[0].auc) + " not above mean AUC " +
               format_double(rows[1].auc));
    expect(rows[0].auc > rows[2].auc,
           "alarm-any AUC " + format_double(rows[0].auc) + " not above median AUC " +
               format_double(rows[2].auc));

    std::vector<AggregationPolicy> sweep;
    for (int k : {1, 5, 10, 25})
        sweep.push_back(AggregationPolicy::alarm_count(k));
    const auto k_rows = simulate_policy_comparison(spec, sweep);
    for (std::size_t i = 1; i < k_rows.size(); ++i) {
        expect(k_rows[i].fpr <= k_rows[i - 1].fpr,
               "FPR grew from k=" + k_rows[i - 1].policy.name() + " to " +
                   k_rows[i].policy.name());
        const double md_prev = 1.0 - k_rows[i - 1].tpr;
        const double md_here = 1.0 - k_rows[i].tpr;
        expect(md_here >= md_prev, "missed detections shrank from " +
                                       k_rows[i - 1].policy.name() + " to " +
                                       k_rows[i].policy.name());
    }
}

// --------------------------------------------------------------------------
// 6. Fusion is exactly the arithmetic mean.
// --------------------------------------------------------------------------

void check_fusion_exactness() {
    Rng rng(606);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> scores(static_cast<std::size_t>(rng.uniform_int(1, 32)));
        for (auto& s : scores)
            s = rng.uniform_double(-10.0, 10.0);
        double sum = 0.0;
        for (double s : scores)
            sum += s;
        const double mean = sum / static_cast<double>(scores.size());
        expect(fuse_ensemble(scores) == mean, "fusion deviates from the arithmetic mean");
    }
    const double x = -0.4375;
    expect(fuse_ensemble({x}) == x, "single-scorer fusion is not the identity");
}

// --------------------------------------------------------------------------
// 7. End-to-end determinism of the detect command.
// --------------------------------------------------------------------------

std::string cli_binary() {
    if (const char* env = std::getenv("PATCHDET_CLI"))
        return env;
    for (const char* candidate : {"./tools/patchdet", "../tools/patchdet", "tools/patchdet"})
        if (fs::exists(candidate))
            return candidate;
    throw CheckFailure("cannot locate the patchdet binary (set PATCHDET_CLI)");
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    expect(in.good(), "missing output file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void check_detect_determinism() {
    const std::string binary = cli_binary();
    const fs::path dir =
        fs::temp_directory_path() / ("patchdet_acceptance_" + std::to_string(getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir / "in");

    for (int i = 0; i < 10; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%02d.png", i);
        png_write_file((dir / "in" / name).string(),
                       make_textured_image(160, 160, 4000 + i));
    }
    {
        std::ofstream config(dir / "ensemble.json");
        config << R"({"patch_size": 32, "scorers": [
            {"id": "luma", "analytic": {"kind": "luma_threshold", "pivot": 0.45, "gain": 4.0},
             "sampling": {"mode": "random", "count": 50}, "aggregation": "alarm-any"},
            {"id": "checker", "analytic": {"kind": "planted_signal", "pattern": "checker",
                                            "period": 8, "gain": 2.0},
             "sampling": {"mode": "grid-aligned", "count": 40}, "aggregation": "mean"}]})";
    }

    const auto run = [&](const std::string& extra, const std::string& out) {
        const std::string command = binary + " detect " + (dir / "in").string() + " --config " +
                                    (dir / "ensemble.json").string() + " --seed 3 " + extra +
                                    " --output " + (dir / out).string() + " 2> /dev/null";
        const int status = std::system(command.c_str());
        expect(WEXITSTATUS(status) == 0, "detect exited with " +
                                             std::to_string(WEXITSTATUS(status)));
    };
    run("", "a.jsonl");
    run("", "b.jsonl");
    run("--workers 1", "w1.jsonl");
    run("--workers 8", "w8.jsonl");

    const std::string reference = slurp(dir / "a.jsonl");
    expect(!reference.empty(), "detect produced empty output");
    expect(slurp(dir / "b.jsonl") == reference, "repeat run differs byte-wise");
    expect(slurp(dir / "w1.jsonl") == reference, "worker count 1 changes the output");
    expect(slurp(dir / "w8.jsonl") == reference, "worker count 8 changes the output");
    fs::remove_all(dir);
}

// --------------------------------------------------------------------------
// 8. JPEG quality monotonicity on a fixed natural-looking image.
// --------------------------------------------------------------------------

void check_jpeg_monotonicity() {
    const ImageBuffer image = make_textured_image(256, 256, 3);
    const double mse_q30 = mean_squared_error(image, jpeg_roundtrip(image, 30));
    const double mse_q90 = mean_squared_error(image, jpeg_roundtrip(image, 90));
    expect(mse_q30 > mse_q90, "MSE(q30) = " + format_double(mse_q30) +
                                  " not above MSE(q90) = " + format_double(mse_q90));
}

// --------------------------------------------------------------------------
// 9. Built-in recipe fidelity and the D1/D2 orthogonality claim.
// --------------------------------------------------------------------------

void check_recipe_fidelity() {
    const DatasetRecipe d1 = builtin_recipe("D1");
    const DatasetRecipe d2 = builtin_recipe("D2");
    const DatasetRecipe d3 = builtin_recipe("D3");
    const DatasetRecipe d4 = builtin_recipe("D4");
    const DatasetRecipe d5 = builtin_recipe("D5");

    const std::set<std::string> all = {"afhq2", "ffhq", "metfaces"};
    expect(d1.categories == all && d1.order == RecipeOrder::AugmentThenCrop &&
               d1.patches_per_image == 1 && d1.jpeg_enabled,
           "D1 deviates from its construction table");
    expect(d2.categories == all && d2.order == RecipeOrder::CropThenAugment &&
               d2.patches_per_image == 1 && d2.jpeg_enabled,
           "D2 deviates from its construction table");
    expect(d3.categories == std::set<std::string>{"afhq2"} && d3.patches_per_image == 10 &&
               !d3.jpeg_enabled,
           "D3 deviates from its construction table");
    expect(d4.categories == std::set<std::string>{"afhq2", "metfaces"} &&
               d4.patches_per_image == 10 && !d4.jpeg_enabled,
           "D4 deviates from its construction table");
    expect(d5.categories == std::set<std::string>{"ffhq"} && d5.patches_per_image == 1 &&
               d5.jpeg_enabled,
           "D5 deviates from its construction table");

    const auto report = validate_orthogonality({d1, d2});
    const auto& conditions = report.pairs.at(0).conditions;
    expect(conditions.processing_order, "D1/D2 should be orthogonal via processing order");
    expect(!conditions.semantic, "D1/D2 must not be semantically orthogonal");
    expect(!conditions.jpeg, "D1/D2 share the same JPEG treatment");
    expect(!conditions.generators, "D1/D2 share the same generators");
}

struct Criterion {
    std::string name;
    double time_limit_seconds;
    std::function<void()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"aggregation-oracle-equivalence", 1.0, check_aggregation_oracle},
        {"auc-oracle-equivalence", 5.0, check_auc_oracle},
        {"grid-alignment", 30.0, check_grid_alignment},
        {"augmentation-frequencies", 60.0, check_augmentation_frequencies},
        {"policy-ordering-and-k-tradeoff", 30.0, check_policy_ordering},
        {"fusion-exactness", 5.0, check_fusion_exactness},
        {"detect-determinism", 120.0, check_detect_determinism},
        {"jpeg-monotonicity", 30.0, check_jpeg_monotonicity},
        {"recipe-fidelity", 5.0, check_recipe_fidelity},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string failure;
        try {
            criterion.run();
        } catch (const std::exception& e) {
            failure = e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (failure.empty() && elapsed > criterion.time_limit_seconds)
            failure = "exceeded time limit of " + format_double(criterion.time_limit_seconds) +
                      " s (took " + format_double(elapsed) + " s)";
        if (failure.empty()) {
            std::cout << "PASS " << criterion.name << " ("
                      << static_cast<long>(elapsed * 1000) << " ms)\n";
        } else {
            std::cout << "FAIL " << criterion.name << ": " << failure << "\n";
            ++failures;
        }
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) +
                                                              " criterion(s) failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
