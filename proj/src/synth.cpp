#include "sts/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sts/rng.hpp"

namespace sts {

namespace {

double quantize8(double v) {
    return std::round(v * 1e8) / 1e8;
}

double clamp_quantized(double v, double lo, double hi) {
    return std::clamp(quantize8(v), lo, hi);
}

std::string sequence_id(std::uint64_t index, std::size_t width) {
    std::string digits = std::to_string(index);
    if (digits.size() < width) {
        digits.insert(0, width - digits.size(), '0');
    }
    return "img_" + digits;
}

}  // namespace

SurveyManifest generate(const SynthParams& params, DistanceMetric metric,
                        std::string name, bool* truncated) {
    if (params.n_images < 1) {
        throw std::invalid_argument("synth: n_images must be >= 1");
    }
    const BBox& b = params.bbox;
    if (!(b.lat_min < b.lat_max) || !(b.lon_min < b.lon_max)) {
        throw std::invalid_argument("synth: bbox must satisfy min < max on both axes");
    }
    if (!is_valid(Coordinate{b.lat_min, b.lon_min}) ||
        !is_valid(Coordinate{b.lat_max, b.lon_max})) {
        throw std::invalid_argument("synth: bbox outside coordinate range");
    }
    if (!(params.positives_per_cluster_mean > 0.0)) {
        throw std::invalid_argument("synth: positives_per_cluster_mean must be > 0");
    }
    if (!(params.cluster_radius >= 0.0)) {
        throw std::invalid_argument("synth: cluster_radius must be >= 0");
    }
    if (!(params.animals_per_positive_mean >= 1.0)) {
        throw std::invalid_argument("synth: animals_per_positive_mean must be >= 1");
    }

    Rng rng(derive_seed(params.seed, "synth"));
    const double lat_span = b.lat_max - b.lat_min;
    const double lon_span = b.lon_max - b.lon_min;

    std::vector<ImageRecord> records;
    records.reserve(params.n_images);
    const std::size_t width = std::to_string(params.n_images).size();
    bool hit_cap = false;

    // Cluster positives. Draw order per cluster: center (lat, lon), offspring
    // count, then per offspring the Gaussian offset pair and the animal count.
    for (std::uint64_t c = 0; c < params.n_clusters && !hit_cap; ++c) {
        const double center_lat = b.lat_min + rng.next_unit() * lat_span;
        const double center_lon = b.lon_min + rng.next_unit() * lon_span;
        const std::uint64_t offspring =
            rng.next_poisson(params.positives_per_cluster_mean);
        for (std::uint64_t i = 0; i < offspring; ++i) {
            if (records.size() == params.n_images) {
                hit_cap = true;
                break;
            }
            const auto [g_lat, g_lon] = rng.next_gaussian_pair();
            ImageRecord rec;
            rec.image_id = sequence_id(records.size(), width);
            rec.coord.lat = clamp_quantized(
                center_lat + g_lat * params.cluster_radius, b.lat_min, b.lat_max);
            rec.coord.lon = clamp_quantized(
                center_lon + g_lon * params.cluster_radius, b.lon_min, b.lon_max);
            rec.animal_count =
                1 + rng.next_poisson(params.animals_per_positive_mean - 1.0);
            records.push_back(std::move(rec));
        }
    }

    // Uniform background.
    while (records.size() < params.n_images) {
        ImageRecord rec;
        rec.image_id = sequence_id(records.size(), width);
        rec.coord.lat = clamp_quantized(b.lat_min + rng.next_unit() * lat_span,
                                        b.lat_min, b.lat_max);
        rec.coord.lon = clamp_quantized(b.lon_min + rng.next_unit() * lon_span,
                                        b.lon_min, b.lon_max);
        rec.animal_count = 0;
        records.push_back(std::move(rec));
    }

    if (truncated != nullptr) *truncated = hit_cap;
    return SurveyManifest::from_records(std::move(name), std::move(records),
                                        metric);
}

}  // namespace sts
