#pragma once

#include <cstdint>
#include <string>

#include "sts/survey.hpp"

namespace sts {

struct BBox {
    double lat_min = 0.0;
    double lat_max = 0.0;
    double lon_min = 0.0;
    double lon_max = 0.0;
};

struct SynthParams {
    std::uint64_t n_images = 0;
    BBox bbox;
    std::uint64_t n_clusters = 0;
    double positives_per_cluster_mean = 1.0;
    double cluster_radius = 0.0;            // degrees (Gaussian sigma)
    double animals_per_positive_mean = 1.0; // >= 1
    std::uint64_t seed = 0;
};

// Thomas-style cluster process: uniform parent centers, Poisson offspring
// counts, isotropic Gaussian offsets clipped to the bbox; the remainder of
// the survey is uniform background with animal_count 0. Positive generation
// saturates at n_images (background drops to zero); `truncated`, when given,
// reports whether that cap was hit. Deterministic per seed; coordinates are
// quantized to 8 decimal places.
SurveyManifest generate(const SynthParams& params,
                        DistanceMetric metric = DistanceMetric::DegreeEuclidean,
                        std::string name = "synthetic",
                        bool* truncated = nullptr);

}  // namespace sts
