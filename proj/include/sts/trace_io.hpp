#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "sts/search.hpp"

namespace sts {

// "sample" / "bfs"
std::string phase_name(Phase phase);
Phase parse_phase(const std::string& text);

// One step per line, stable key order:
// {step_index, image_id, lat, lon, phase, parent_image_id, predicted_count,
//  positive}; parent_image_id is null outside BFS.
void write_trace_ndjson(const RunTrace& trace, std::ostream& sink);

// Parses a trace written by write_trace_ndjson. Errors carry the 1-based
// line number. Blank trailing lines are tolerated.
std::vector<TraceStep> parse_trace_ndjson(std::istream& source);

// GeoJSON FeatureCollection: one Point feature per step, coordinates
// [lon, lat], properties {step_index, image_id, phase, positive,
// parent_image_id}.
nlohmann::ordered_json trace_geojson(const std::vector<TraceStep>& steps);

}  // namespace sts
