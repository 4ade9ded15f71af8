#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sts/geo.hpp"
#include "sts/oracle.hpp"
#include "sts/survey.hpp"

namespace sts {

// Termination policy. Exhaust runs all passes to completion; RecallTarget is
// an evaluation-mode rule that stops once a fraction of the ground-truth
// positives (by image or by animal count) has been walked over; Budget caps
// the number of oracle evaluations.
struct StopRule {
    enum class Kind { Exhaust, RecallTarget, Budget };
    enum class RecallBasis { PositiveImages, Animals };

    Kind kind = Kind::Exhaust;
    double recall_fraction = 0.0;
    RecallBasis basis = RecallBasis::PositiveImages;
    std::uint64_t max_evaluations = 0;

    static StopRule exhaust();
    static StopRule recall(double fraction, RecallBasis basis);
    static StopRule budget(std::uint64_t max_evaluations);

    // Compact shell-friendly encoding: "exhaust", "budget:N",
    // "recall:F:positive_images" / "recall:F:animals".
    std::string to_string() const;
    static StopRule parse(const std::string& text);

    friend bool operator==(const StopRule& a, const StopRule& b);
};

struct StsConfig {
    std::uint64_t k = 10;       // samples per batch and neighbors per query
    double d = 0.6;             // maximum neighbor distance, metric units
    std::uint64_t restarts = 1; // number of phase-1 + phase-2 passes
    std::uint64_t seed = 0;
    StopRule stop;
};

enum class Phase { Sample, Bfs };

struct TraceStep {
    std::uint64_t step_index = 0;  // 0-based
    std::string image_id;
    Coordinate coord;
    Phase phase = Phase::Sample;
    std::optional<std::string> parent_image_id;  // the dequeued parent, BFS only
    DetectionResult result;
};

struct RunTrace {
    std::vector<TraceStep> steps;
    std::string algorithm;  // "sts" or "random"
    std::uint64_t seed = 0;
    StopRule stop;
    std::optional<StsConfig> sts_config;
    SurveyTotals manifest_totals;
    // Set when a RecallTarget rule could not be met before the run exhausted
    // its passes (or the whole survey).
    bool recall_unreachable = false;

    std::uint64_t n_evaluated() const { return steps.size(); }
};

// Fractional metrics of one run. "Found" positives are counted by ground
// truth over the evaluated images, whatever the oracle reported; recall
// denominators of zero yield 1.0 (vacuously complete).
struct RunMetrics {
    double pct_images_analyzed = 0.0;
    double pct_positive_images_found = 0.0;
    double pct_animals_detected = 0.0;
    std::uint64_t n_evaluated = 0;
    bool recall_unreachable = false;
};

RunMetrics compute_metrics(const RunTrace& trace,
                           const SurveyManifest& manifest);

// Smallest integer count whose ratio to `total` reaches `fraction`; the same
// predicate the RecallTarget rule uses, so stop behavior and the analytic
// baseline agree exactly. total == 0 returns an unreachable sentinel of 1.
std::uint64_t min_count_for_recall(double fraction, std::uint64_t total);

// The two-phase search: uniform batch sampling without replacement until a
// positive is found, then FIFO breadth-first expansion over k-nearest
// neighbors within distance d (KD-tree rebuilt on the remaining candidates
// at each expansion). Passes share the remaining-candidate set, so no image
// is ever evaluated twice.
RunTrace run_sts(const SurveyManifest& manifest, const DetectionOracle& oracle,
                 const StsConfig& config);

// Baseline: evaluates a uniform random permutation of the survey in order.
RunTrace run_random_search(const SurveyManifest& manifest,
                           const DetectionOracle& oracle, std::uint64_t seed,
                           const StopRule& stop);

}  // namespace sts
