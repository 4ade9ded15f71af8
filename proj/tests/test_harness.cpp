#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sts/harness.hpp"
#include "sts/oracle.hpp"
#include "sts/survey.hpp"
#include "sts/synth.hpp"

using namespace sts;

namespace {

SurveyManifest clustered_manifest(std::uint64_t seed = 21) {
    SynthParams p;
    p.n_images = 300;
    p.bbox = BBox{60.0, 70.0, -80.0, -65.0};
    p.n_clusters = 3;
    p.positives_per_cluster_mean = 10.0;
    p.cluster_radius = 0.1;
    p.animals_per_positive_mean = 3.0;
    p.seed = seed;
    return generate(p);
}

}  // namespace

TEST_CASE("repeats=1 aggregates to the single run with zero std") {
    const SurveyManifest m = clustered_manifest();
    const DetectionOracle oracle = DetectionOracle::ground_truth(m);
    ExperimentSpec spec;
    spec.algorithm = "sts";
    spec.k = 5;
    spec.d = 0.6;
    spec.repeats = 1;
    spec.base_seed = 4;
    const AggregateStats stats = run_experiment(m, oracle, spec);
    REQUIRE(stats.per_run.size() == 1);
    const RunMetrics& only = stats.per_run[0];
    CHECK(stats.pct_images_analyzed.mean == only.pct_images_analyzed);
    CHECK(stats.pct_images_analyzed.std == 0.0);
    CHECK(stats.pct_images_analyzed.min == only.pct_images_analyzed);
    CHECK(stats.pct_images_analyzed.max == only.pct_images_analyzed);
    CHECK(stats.pct_animals_detected.std == 0.0);
}

TEST_CASE("aggregate stats are ordered and runs are seeded consecutively") {
    const SurveyManifest m = clustered_manifest();
    const DetectionOracle oracle = DetectionOracle::ground_truth(m);
    ExperimentSpec spec;
    spec.algorithm = "random";
    spec.stop = StopRule::recall(0.9, StopRule::RecallBasis::PositiveImages);
    spec.repeats = 10;
    spec.base_seed = 100;

    std::vector<std::uint64_t> sink_indices;
    std::vector<std::uint64_t> sink_seeds;
    const AggregateStats stats = run_experiment(
        m, oracle, spec, [&](std::uint64_t i, const RunTrace& trace) {
            sink_indices.push_back(i);
            sink_seeds.push_back(trace.seed);
        });

    REQUIRE(stats.per_run.size() == 10);
    for (std::uint64_t i = 0; i < 10; ++i) {
        CHECK(sink_indices[i] == i);
        CHECK(sink_seeds[i] == 100 + i);
    }
    for (const MetricStats* s :
         {&stats.pct_images_analyzed, &stats.pct_positive_images_found,
          &stats.pct_animals_detected}) {
        CHECK(s->min <= s->mean);
        CHECK(s->mean <= s->max);
        CHECK(s->std >= 0.0);
    }
    // Independent std recomputation.
    double sum = 0.0;
    for (const RunMetrics& r : stats.per_run) sum += r.pct_images_analyzed;
    const double mean = sum / 10.0;
    double ss = 0.0;
    for (const RunMetrics& r : stats.per_run) {
        ss += (r.pct_images_analyzed - mean) * (r.pct_images_analyzed - mean);
    }
    CHECK(stats.pct_images_analyzed.std ==
          doctest::Approx(std::sqrt(ss / 9.0)).epsilon(1e-12));
    CHECK(stats.pct_images_analyzed.mean == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("run_experiment validates its inputs") {
    const SurveyManifest m = clustered_manifest();
    const DetectionOracle oracle = DetectionOracle::ground_truth(m);
    ExperimentSpec spec;
    spec.repeats = 0;
    CHECK_THROWS_AS(run_experiment(m, oracle, spec), std::invalid_argument);
    spec.repeats = 1;
    spec.algorithm = "greedy";
    CHECK_THROWS_AS(run_experiment(m, oracle, spec), std::invalid_argument);
}

TEST_CASE("failing runs name the seed") {
    const SurveyManifest m = clustered_manifest();
    const DetectionOracle oracle = DetectionOracle::ground_truth(m);
    ExperimentSpec spec;
    spec.algorithm = "sts";
    spec.k = 0;  // rejected inside run_sts
    spec.base_seed = 41;
    CHECK_THROWS_WITH_AS(run_experiment(m, oracle, spec),
                         doctest::Contains("seed 41"), std::runtime_error);
}

TEST_CASE("expected_random_fraction evaluates the order statistic") {
    CHECK(expected_random_fraction(100, 100, 1.0) == 1.0);
    CHECK(expected_random_fraction(2000, 200, 0.95) ==
          doctest::Approx(0.9457462686567164).epsilon(1e-15));
    CHECK(expected_random_fraction(39492, 1644, 0.95) ==
          doctest::Approx(0.9495681169084454).epsilon(1e-15));
    CHECK_THROWS_AS(expected_random_fraction(100, 0, 0.95),
                    std::invalid_argument);
    CHECK_THROWS_AS(expected_random_fraction(100, 101, 0.95),
                    std::invalid_argument);
    CHECK_THROWS_AS(expected_random_fraction(100, 50, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(expected_random_fraction(100, 50, 1.5),
                    std::invalid_argument);
}

TEST_CASE("random search converges to the analytic fraction") {
    SynthParams p;
    p.n_images = 2000;
    p.bbox = BBox{60.0, 75.0, -90.0, -60.0};
    p.n_clusters = 5;
    p.positives_per_cluster_mean = 40.0;
    p.cluster_radius = 0.15;
    p.animals_per_positive_mean = 3.0;
    p.seed = 7;
    const SurveyManifest m = generate(p);
    const DetectionOracle oracle = DetectionOracle::ground_truth(m);

    ExperimentSpec spec;
    spec.algorithm = "random";
    spec.stop = StopRule::recall(0.95, StopRule::RecallBasis::PositiveImages);
    spec.repeats = 40;
    spec.base_seed = 1000;
    const AggregateStats stats = run_experiment(m, oracle, spec);
    const double expected = expected_random_fraction(
        m.totals().n_images, m.totals().n_positive, 0.95);
    CHECK(stats.pct_images_analyzed.mean ==
          doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("results json echoes the experiment and is byte-stable") {
    const SurveyManifest m = clustered_manifest();
    NoisyParams noise;
    noise.detect_prob = 0.7;
    noise.fp_rate = 0.5;
    noise.threshold = 5;
    noise.seed = 11;
    const DetectionOracle oracle = DetectionOracle::noisy(m, noise);
    ExperimentSpec spec;
    spec.algorithm = "sts";
    spec.k = 10;
    spec.d = 0.6;
    spec.restarts = 5;
    spec.stop = StopRule::exhaust();
    spec.repeats = 3;
    spec.base_seed = 11;

    const AggregateStats stats = run_experiment(m, oracle, spec);
    const nlohmann::ordered_json doc = results_json(m, oracle, spec, stats);

    CHECK(doc.at("experiment").at("algorithm") == "sts");
    CHECK(doc.at("experiment").at("k") == 10);
    CHECK(doc.at("experiment").at("stop") == "exhaust");
    CHECK(doc.at("experiment").at("oracle").at("kind") == "noisy");
    CHECK(doc.at("experiment").at("oracle").at("threshold") == 5);
    CHECK(doc.at("experiment").at("manifest").at("n_images") == 300);
    REQUIRE(doc.at("runs").size() == 3);
    CHECK(doc.at("runs")[2].at("seed") == 13);
    CHECK(doc.at("aggregate").at("pct_images_analyzed").contains("mean"));
    CHECK(doc.at("aggregate").at("pct_images_analyzed").contains("std"));

    // Bit-for-bit reproducibility of the serialized document.
    const AggregateStats stats2 = run_experiment(m, oracle, spec);
    const nlohmann::ordered_json doc2 = results_json(m, oracle, spec, stats2);
    CHECK(doc.dump(2) == doc2.dump(2));
}

TEST_CASE("compare reports deltas and verdicts") {
    const SurveyManifest m = clustered_manifest();
    const DetectionOracle oracle = DetectionOracle::ground_truth(m);

    ExperimentSpec sts_spec;
    sts_spec.algorithm = "sts";
    sts_spec.k = 10;
    sts_spec.d = 0.6;
    sts_spec.restarts = 500;
    sts_spec.stop =
        StopRule::recall(0.95, StopRule::RecallBasis::PositiveImages);
    sts_spec.repeats = 8;
    sts_spec.base_seed = 50;

    ExperimentSpec rand_spec = sts_spec;
    rand_spec.algorithm = "random";

    const nlohmann::ordered_json a = results_json(
        m, oracle, sts_spec, run_experiment(m, oracle, sts_spec));
    const nlohmann::ordered_json b = results_json(
        m, oracle, rand_spec, run_experiment(m, oracle, rand_spec));

    SUBCASE("identical inputs give all-zero deltas and pass") {
        const auto report =
            compare_results(a, a, {{"pct_images_analyzed", 0.0}});
        CHECK(report.at("metrics")
                  .at("pct_images_analyzed")
                  .at("delta")
                  .get<double>() == 0.0);
        CHECK(report.at("metrics")
                  .at("pct_positive_images_found")
                  .at("delta")
                  .get<double>() == 0.0);
        CHECK(report.at("verdict") == "pass");
    }

    SUBCASE("clustered sts beats random on images analyzed") {
        const auto report = compare_results(a, b);
        CHECK(report.at("metrics")
                  .at("pct_images_analyzed")
                  .at("delta")
                  .get<double>() < 0.0);
        CHECK(report.at("a").at("algorithm") == "sts");
        CHECK(report.at("b").at("algorithm") == "random");
    }

    SUBCASE("failing threshold flips the verdict") {
        const auto report =
            compare_results(a, b, {{"pct_images_analyzed", 0.01}});
        CHECK(report.at("metrics")
                  .at("pct_images_analyzed")
                  .at("pass")
                  .get<bool>() == false);
        CHECK(report.at("verdict") == "fail");
    }

    SUBCASE("mismatched bases are rejected") {
        const SurveyManifest other = clustered_manifest(22);
        const DetectionOracle o2 = DetectionOracle::ground_truth(other);
        const nlohmann::ordered_json c = results_json(
            other, o2, rand_spec, run_experiment(other, o2, rand_spec));
        CHECK_THROWS_WITH_AS(compare_results(a, c),
                             doctest::Contains("different manifests"),
                             std::runtime_error);

        ExperimentSpec exhaust_spec = rand_spec;
        exhaust_spec.stop = StopRule::exhaust();
        const nlohmann::ordered_json d = results_json(
            m, oracle, exhaust_spec, run_experiment(m, oracle, exhaust_spec));
        CHECK_THROWS_WITH_AS(compare_results(a, d),
                             doctest::Contains("different stop rules"),
                             std::runtime_error);
    }
}

TEST_CASE("all-positive survey makes the algorithms indistinguishable") {
    std::vector<ImageRecord> records;
    for (int i = 0; i < 60; ++i) {
        records.push_back({"p" + std::to_string(i),
                           make_coordinate(60.0 + 0.05 * i, -70.0), 1});
    }
    const SurveyManifest m = SurveyManifest::from_records(
        "dense", std::move(records), DistanceMetric::DegreeEuclidean);
    const DetectionOracle oracle = DetectionOracle::ground_truth(m);

    ExperimentSpec spec;
    spec.algorithm = "sts";
    spec.k = 10;
    spec.d = 0.6;
    spec.restarts = 100;
    spec.stop = StopRule::recall(0.95, StopRule::RecallBasis::PositiveImages);
    spec.repeats = 5;
    spec.base_seed = 2;
    const AggregateStats sts_stats = run_experiment(m, oracle, spec);
    spec.algorithm = "random";
    const AggregateStats rand_stats = run_experiment(m, oracle, spec);

    // Every draw is positive, so both stop after exactly the same count.
    CHECK(sts_stats.pct_images_analyzed.mean ==
          rand_stats.pct_images_analyzed.mean);
    CHECK(sts_stats.pct_images_analyzed.std == 0.0);
    CHECK(rand_stats.pct_images_analyzed.std == 0.0);
}
