#include "sts/oracle.hpp"

#include <stdexcept>

#include "sts/rng.hpp"

namespace sts {

DetectionOracle DetectionOracle::ground_truth(const SurveyManifest& manifest) {
    DetectionOracle o(manifest);
    o.kind_ = Kind::GroundTruth;
    return o;
}

DetectionOracle DetectionOracle::precomputed(const SurveyManifest& manifest,
                                             PredictionTable predictions,
                                             std::uint64_t threshold) {
    DetectionOracle o(manifest);
    o.kind_ = Kind::Precomputed;
    o.predictions_ = std::move(predictions);
    o.threshold_ = threshold;
    return o;
}

DetectionOracle DetectionOracle::noisy(const SurveyManifest& manifest,
                                       const NoisyParams& params) {
    if (!(params.detect_prob >= 0.0 && params.detect_prob <= 1.0)) {
        throw std::invalid_argument("noisy oracle: detect_prob must be in [0,1]");
    }
    if (!(params.fp_rate >= 0.0)) {
        throw std::invalid_argument("noisy oracle: fp_rate must be >= 0");
    }
    DetectionOracle o(manifest);
    o.kind_ = Kind::Noisy;
    o.noisy_ = params;
    o.threshold_ = params.threshold;
    return o;
}

DetectionResult DetectionOracle::evaluate(const std::string& image_id) const {
    const ImageRecord* rec = manifest_->find(image_id);
    if (rec == nullptr) {
        throw std::runtime_error("oracle: unknown image_id '" + image_id + "'");
    }
    switch (kind_) {
        case Kind::GroundTruth:
            return DetectionResult{rec->animal_count, rec->animal_count > 0};
        case Kind::Precomputed: {
            const auto it = predictions_.find(image_id);
            if (it == predictions_.end()) {
                throw std::runtime_error(
                    "oracle: no prediction row for image_id '" + image_id + "'");
            }
            return DetectionResult{it->second, it->second > threshold_};
        }
        case Kind::Noisy: {
            // Per-image substream: draw order is binomial first, then the
            // false-positive term.
            Rng rng(derive_seed(noisy_.seed, "noisy-oracle", image_id));
            const std::uint64_t detected =
                rng.next_binomial(rec->animal_count, noisy_.detect_prob);
            const std::uint64_t spurious = rng.next_poisson(noisy_.fp_rate);
            const std::uint64_t predicted = detected + spurious;
            return DetectionResult{predicted, predicted > threshold_};
        }
    }
    throw std::logic_error("oracle: unreachable");
}

}  // namespace sts
