#pragma once

#include <cstdint>
#include <string>

#include "sts/survey.hpp"

namespace sts {

struct DetectionResult {
    std::uint64_t predicted_count = 0;
    bool is_positive = false;
};

struct NoisyParams {
    double detect_prob = 1.0;   // per-animal detection probability
    double fp_rate = 0.0;       // mean spurious instances per image
    std::uint64_t threshold = 0;  // positive iff predicted_count > threshold
    std::uint64_t seed = 0;
};

// Maps an image id to a detection result, standing in for the detector the
// search algorithm drives. Read-only after binding; evaluate is pure given
// (oracle, id) — noisy draws come from a per-image substream keyed by
// (seed, image_id), so re-evaluations are identical.
class DetectionOracle {
public:
    // Positive iff the ground-truth animal count is > 0.
    static DetectionOracle ground_truth(const SurveyManifest& manifest);

    // Reads a predictions table; positive iff predicted_count > threshold.
    static DetectionOracle precomputed(const SurveyManifest& manifest,
                                       PredictionTable predictions,
                                       std::uint64_t threshold);

    // predicted = Binomial(animal_count, detect_prob) + Poisson(fp_rate);
    // positive iff predicted > threshold.
    static DetectionOracle noisy(const SurveyManifest& manifest,
                                 const NoisyParams& params);

    DetectionResult evaluate(const std::string& image_id) const;

    enum class Kind { GroundTruth, Precomputed, Noisy };
    Kind kind() const { return kind_; }
    std::uint64_t threshold() const { return threshold_; }
    const NoisyParams& noisy_params() const { return noisy_; }

private:
    explicit DetectionOracle(const SurveyManifest& manifest)
        : manifest_(&manifest) {}

    const SurveyManifest* manifest_;
    Kind kind_ = Kind::GroundTruth;
    PredictionTable predictions_;
    std::uint64_t threshold_ = 0;
    NoisyParams noisy_;
};

}  // namespace sts
