#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "patchdet/error.hpp"
#include "patchdet/evaluation.hpp"
#include "patchdet/rng.hpp"

using namespace patchdet;

namespace {

/// O(n^2) Mann-Whitney pair counting, ties worth one half.
double auc_oracle(const std::vector<LabeledScore>& samples) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (const auto& s : samples) {
        if (s.truth != Verdict::Synthetic)
            continue;
        for (const auto& r : samples) {
            if (r.truth != Verdict::Real)
                continue;
            ++pairs;
            if (s.score > r.score)
                wins += 1.0;
            else if (s.score == r.score)
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

std::vector<LabeledScore> random_samples(Rng& rng, int max_n = 300) {
    const int n = rng.uniform_int(2, max_n);
    std::vector<LabeledScore> samples;
    samples.push_back({rng.uniform_double(-3.0, 3.0), Verdict::Real});
    samples.push_back({rng.uniform_double(-3.0, 3.0), Verdict::Synthetic});
    for (int i = 2; i < n; ++i) {
        LabeledScore sample;
        // quantized scores so ties actually occur
        sample.score = rng.uniform_int(-12, 12) / 4.0;
        sample.truth = rng.bernoulli(0.5) ? Verdict::Synthetic : Verdict::Real;
        samples.push_back(sample);
    }
    return samples;
}

double trapezoid_area(const std::vector<RocPoint>& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
    return area;
}

}  // namespace

TEST_CASE("AUC hits the trivial extremes") {
    CHECK(compute_auc({{-1.0, Verdict::Real}, {1.0, Verdict::Synthetic}}).auc == 1.0);
    CHECK(compute_auc({{1.0, Verdict::Real}, {-1.0, Verdict::Synthetic}}).auc == 0.0);
    CHECK(compute_auc({{0.5, Verdict::Real}, {0.5, Verdict::Synthetic}}).auc == 0.5);
}

TEST_CASE("AUC equals the pairwise oracle within 1e-12") {
    Rng rng(424242);
    for (int trial = 0; trial < 100; ++trial) {
        const auto samples = random_samples(rng);
        const RocResult roc = compute_auc(samples);
        CHECK(std::abs(roc.auc - auc_oracle(samples)) <= 1e-12);
    }
}

TEST_CASE("the ROC curve runs from (0,0) to (1,1) monotonically and integrates to the AUC") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto samples = random_samples(rng);
        const RocResult roc = compute_auc(samples);
        REQUIRE(roc.curve.size() >= 2);
        CHECK(roc.curve.front().fpr == 0.0);
        CHECK(roc.curve.front().tpr == 0.0);
        CHECK(roc.curve.back().fpr == 1.0);
        CHECK(roc.curve.back().tpr == 1.0);
        for (std::size_t i = 1; i < roc.curve.size(); ++i) {
            CHECK(roc.curve[i].fpr >= roc.curve[i - 1].fpr);
            CHECK(roc.curve[i].tpr >= roc.curve[i - 1].tpr);
        }
        CHECK(std::abs(trapezoid_area(roc.curve) - roc.auc) <= 1e-12);
    }
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
    Rng rng(33);
    const auto samples = random_samples(rng, 200);
    const double base = compute_auc(samples).auc;

    auto transformed = samples;
    for (auto& sample : transformed)
        sample.score = std::exp(sample.score);
    CHECK(compute_auc(transformed).auc == base);

    transformed = samples;
    for (auto& sample : transformed)
        sample.score = sample.score * 3.0 - 7.0;
    CHECK(compute_auc(transformed).auc == base);
}

TEST_CASE("negating scores and swapping labels leaves AUC unchanged") {
    Rng rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        const auto samples = random_samples(rng, 200);
        auto flipped = samples;
        for (auto& sample : flipped) {
            sample.score = -sample.score;
            sample.truth = sample.truth == Verdict::Real ? Verdict::Synthetic : Verdict::Real;
        }
        CHECK(compute_auc(flipped).auc == compute_auc(samples).auc);
    }
}

TEST_CASE("single-class inputs are rejected") {
    const std::vector<LabeledScore> only_real = {{0.1, Verdict::Real}, {0.2, Verdict::Real}};
    try {
        compute_auc(only_real);
        FAIL("expected SingleClass");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingleClass);
    }
    CHECK_THROWS_AS(confusion_at(only_real), Error);
}

TEST_CASE("confusion at threshold zero matches the worked examples") {
    const ConfusionResult separated =
        confusion_at({{-1.0, Verdict::Real}, {1.0, Verdict::Synthetic}});
    CHECK(separated.tpr == 1.0);
    CHECK(separated.fpr == 0.0);

    const ConfusionResult collapsed =
        confusion_at({{1.0, Verdict::Real}, {1.0, Verdict::Synthetic}});
    CHECK(collapsed.tpr == 1.0);
    CHECK(collapsed.fpr == 1.0);

    // a synthetic image scored exactly zero counts as detected
    const ConfusionResult boundary =
        confusion_at({{-1.0, Verdict::Real}, {0.0, Verdict::Synthetic}});
    CHECK(boundary.tpr == 1.0);
    CHECK(boundary.counts.true_positives == 1);
}

TEST_CASE("tpr/fpr at zero agree with classify's convention") {
    Rng rng(35);
    const auto samples = random_samples(rng, 150);
    const RocResult roc = compute_auc(samples);
    std::size_t tp = 0, fp = 0, ns = 0, nr = 0;
    for (const auto& sample : samples) {
        const bool synthetic = classify(sample.score) == Verdict::Synthetic;
        if (sample.truth == Verdict::Synthetic) {
            ++ns;
            tp += synthetic ? 1 : 0;
        } else {
            ++nr;
            fp += synthetic ? 1 : 0;
        }
    }
    CHECK(roc.tpr_at_zero == static_cast<double>(tp) / ns);
    CHECK(roc.fpr_at_zero == static_cast<double>(fp) / nr);
}

TEST_CASE("histograms preserve class counts") {
    SUBCASE("one sample occupies one bin") {
        const HistogramResult hist = histogram({{0.7, Verdict::Real}}, 5);
        std::size_t total = 0;
        for (std::size_t i = 0; i < hist.real_counts.size(); ++i)
            total += hist.real_counts[i] + hist.synthetic_counts[i];
        CHECK(total == 1);
    }

    SUBCASE("counts always sum to the class sizes") {
        Rng rng(36);
        const auto samples = random_samples(rng, 250);
        std::size_t real = 0, synthetic = 0;
        for (const auto& s : samples)
            (s.truth == Verdict::Real ? real : synthetic) += 1;
        for (int bins : {1, 3, 10, 50}) {
            const HistogramResult hist = histogram(samples, bins);
            std::size_t real_sum = 0, synthetic_sum = 0;
            for (std::size_t i = 0; i < hist.real_counts.size(); ++i) {
                real_sum += hist.real_counts[i];
                synthetic_sum += hist.synthetic_counts[i];
            }
            CHECK(real_sum == real);
            CHECK(synthetic_sum == synthetic);
        }
    }

    SUBCASE("uniform scores spread evenly, within multinomial noise") {
        Rng rng(37);
        std::vector<LabeledScore> samples;
        const int n = 10000;
        samples.push_back({0.0, Verdict::Real});  // keep both classes present
        for (int i = 0; i < n; ++i)
            samples.push_back({rng.uniform_double(), Verdict::Synthetic});
        const HistogramResult hist = histogram(samples, 10);
        const double expect = n / 10.0;
        const double sigma = std::sqrt(n * 0.1 * 0.9);
        for (const auto count : hist.synthetic_counts)
            CHECK(std::abs(static_cast<double>(count) - expect) <= 4.0 * sigma);
    }
}

TEST_CASE("fully separated simulations score near-perfect AUC for every policy") {
    SimulationSpec spec;
    spec.images_per_class = 500;
    spec.patches_per_image = 100;
    spec.signal_fraction = 1.0;
    spec.seed = 1;
    const auto rows = simulate_policy_comparison(
        spec, {AggregationPolicy::alarm_any(), AggregationPolicy::mean(),
               AggregationPolicy::median()});
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows)
        CHECK(row.auc > 0.99);
}

TEST_CASE("with localized signal the alarm rule beats mean and median") {
    SimulationSpec spec;  // defaults: f = 0.1, mu -2/+2, sigma 0.5, P = 100, 500/class
    spec.seed = 7;
    const auto rows = simulate_policy_comparison(
        spec, {AggregationPolicy::alarm_any(), AggregationPolicy::mean(),
               AggregationPolicy::median()});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].auc > rows[1].auc);
    CHECK(rows[0].auc > rows[2].auc);
}

TEST_CASE("raising k trades false alarms for missed detections") {
    SimulationSpec spec;
    spec.seed = 7;
    std::vector<AggregationPolicy> policies;
    for (int k : {1, 5, 10, 25})
        policies.push_back(AggregationPolicy::alarm_count(k));
    const auto rows = simulate_policy_comparison(spec, policies);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].fpr <= rows[i - 1].fpr);
        CHECK(rows[i].tpr <= rows[i - 1].tpr);  // missed detections non-decreasing
    }
}

TEST_CASE("simulation is deterministic under its seed") {
    SimulationSpec spec;
    spec.images_per_class = 50;
    spec.seed = 9;
    const auto a = simulate_policy_comparison(spec, {AggregationPolicy::alarm_any()});
    const auto b = simulate_policy_comparison(spec, {AggregationPolicy::alarm_any()});
    CHECK(a[0].auc == b[0].auc);
    CHECK(a[0].tpr == b[0].tpr);
    CHECK(a[0].fpr == b[0].fpr);
}

TEST_CASE("simulation specs are validated") {
    SimulationSpec spec;
    spec.sigma = 0.0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = SimulationSpec{};
    spec.signal_fraction = 0.0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = SimulationSpec{};
    spec.images_per_class = 0;
    CHECK_THROWS_AS(spec.validate(), Error);
}
