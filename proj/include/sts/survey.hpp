#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "sts/geo.hpp"

namespace sts {

struct ImageRecord {
    std::string image_id;
    Coordinate coord;
    std::uint64_t animal_count = 0;  // ground-truth animals in the image

    friend bool operator==(const ImageRecord& a, const ImageRecord& b) {
        return a.image_id == b.image_id && a.coord == b.coord &&
               a.animal_count == b.animal_count;
    }
};

struct SurveyTotals {
    std::uint64_t n_images = 0;
    std::uint64_t n_positive = 0;  // records with animal_count > 0
    std::uint64_t n_animals = 0;   // sum of animal_count
};

// The candidate set plus ground truth. Immutable after construction; safe to
// share read-only across concurrent runs.
class SurveyManifest {
public:
    static SurveyManifest from_records(std::string name,
                                       std::vector<ImageRecord> records,
                                       DistanceMetric metric);

    const std::string& name() const { return name_; }
    DistanceMetric metric() const { return metric_; }
    const std::vector<ImageRecord>& records() const { return records_; }
    const SurveyTotals& totals() const { return totals_; }

    // nullptr when the id is unknown.
    const ImageRecord* find(const std::string& image_id) const;

private:
    std::string name_;
    DistanceMetric metric_ = DistanceMetric::DegreeEuclidean;
    std::vector<ImageRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
    SurveyTotals totals_;
};

// Manifest CSV: UTF-8, comma separated, header exactly
// `image_id,lat,lon,animal_count`. Row order is preserved. Parse errors
// carry the 1-based line number (header is line 1).
SurveyManifest parse_manifest(std::istream& source, DistanceMetric metric,
                              std::string name = "");
void write_manifest(const SurveyManifest& manifest, std::ostream& sink);

// Predictions CSV, header exactly `image_id,predicted_count`.
using PredictionTable = std::unordered_map<std::string, std::uint64_t>;
PredictionTable parse_predictions(std::istream& source);

// Shortest representation that round-trips the double exactly; stays within
// 8 fraction digits for coordinates that are 8-decimal quantized.
std::string format_double(double value);

}  // namespace sts
