#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sts/oracle.hpp"
#include "sts/search.hpp"
#include "sts/survey.hpp"

namespace sts {

// What to run and how often. Run i uses seed = base_seed + i, so any single
// run can be re-executed in isolation.
struct ExperimentSpec {
    std::string algorithm = "sts";  // "sts" or "random"
    std::uint64_t k = 10;           // sts only
    double d = 0.6;                 // sts only
    std::uint64_t restarts = 1;     // sts only
    StopRule stop;
    std::uint64_t repeats = 1;
    std::uint64_t base_seed = 0;
};

struct MetricStats {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n-1); 0 when repeats == 1
    double min = 0.0;
    double max = 0.0;
};

struct AggregateStats {
    MetricStats pct_images_analyzed;
    MetricStats pct_positive_images_found;
    MetricStats pct_animals_detected;
    std::vector<RunMetrics> per_run;  // indexed by run number
};

// Called once per completed run, in run order.
using TraceSink =
    std::function<void(std::uint64_t run_index, const RunTrace& trace)>;

// Executes spec.repeats independent runs and aggregates the three metrics.
// Deterministic given (manifest, oracle, spec). A failing run aborts the
// experiment with its seed identified in the error message.
AggregateStats run_experiment(const SurveyManifest& manifest,
                              const DetectionOracle& oracle,
                              const ExperimentSpec& spec,
                              const TraceSink& sink = {});

// Exact expectation of the analyzed fraction when a uniform random
// permutation is scanned until the r-th positive, r being the same count the
// RecallTarget rule requires: r * (n_images + 1) / ((n_positive + 1) * n_images).
double expected_random_fraction(std::uint64_t n_images,
                                std::uint64_t n_positive,
                                double recall_target);

// Results document: { experiment: config echo, runs: [...], aggregate: {...} }
// with stable key order, so identical experiments serialize byte-identically.
nlohmann::ordered_json results_json(const SurveyManifest& manifest,
                                    const DetectionOracle& oracle,
                                    const ExperimentSpec& spec,
                                    const AggregateStats& stats);

// Per-metric mean deltas (a - b) with pooled standard deviations. Metrics
// named in `max_abs_delta` also get a pass flag (|delta| <= threshold); the
// overall verdict is "pass" iff every thresholded metric passes. Requires
// both results to describe the same manifest and stop rule.
nlohmann::ordered_json compare_results(
    const nlohmann::ordered_json& a, const nlohmann::ordered_json& b,
    const std::map<std::string, double>& max_abs_delta = {});

}  // namespace sts
