#include "sts/trace_io.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sts {

std::string phase_name(Phase phase) {
    return phase == Phase::Sample ? "sample" : "bfs";
}

Phase parse_phase(const std::string& text) {
    if (text == "sample") return Phase::Sample;
    if (text == "bfs") return Phase::Bfs;
    throw std::invalid_argument("bad phase '" + text + "'");
}

namespace {

nlohmann::ordered_json step_json(const TraceStep& step) {
    nlohmann::ordered_json j;
    j["step_index"] = step.step_index;
    j["image_id"] = step.image_id;
    j["lat"] = step.coord.lat;
    j["lon"] = step.coord.lon;
    j["phase"] = phase_name(step.phase);
    if (step.parent_image_id) {
        j["parent_image_id"] = *step.parent_image_id;
    } else {
        j["parent_image_id"] = nullptr;
    }
    j["predicted_count"] = step.result.predicted_count;
    j["positive"] = step.result.is_positive;
    return j;
}

}  // namespace

void write_trace_ndjson(const RunTrace& trace, std::ostream& sink) {
    for (const TraceStep& step : trace.steps) {
        sink << step_json(step).dump() << '\n';
    }
    if (!sink) throw std::runtime_error("trace write failed");
}

std::vector<TraceStep> parse_trace_ndjson(std::istream& source) {
    std::vector<TraceStep> steps;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = "trace line " + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
        try {
            TraceStep step;
            step.step_index = j.at("step_index").get<std::uint64_t>();
            step.image_id = j.at("image_id").get<std::string>();
            step.coord = make_coordinate(j.at("lat").get<double>(),
                                         j.at("lon").get<double>());
            step.phase = parse_phase(j.at("phase").get<std::string>());
            const auto& parent = j.at("parent_image_id");
            if (!parent.is_null()) {
                step.parent_image_id = parent.get<std::string>();
            }
            step.result.predicted_count =
                j.at("predicted_count").get<std::uint64_t>();
            step.result.is_positive = j.at("positive").get<bool>();
            steps.push_back(std::move(step));
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
    }
    return steps;
}

nlohmann::ordered_json trace_geojson(const std::vector<TraceStep>& steps) {
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (const TraceStep& step : steps) {
        nlohmann::ordered_json props;
        props["step_index"] = step.step_index;
        props["image_id"] = step.image_id;
        props["phase"] = phase_name(step.phase);
        props["positive"] = step.result.is_positive;
        if (step.parent_image_id) {
            props["parent_image_id"] = *step.parent_image_id;
        } else {
            props["parent_image_id"] = nullptr;
        }
        features.push_back({
            {"type", "Feature"},
            {"geometry",
             {{"type", "Point"},
              {"coordinates", {step.coord.lon, step.coord.lat}}}},
            {"properties", props},
        });
    }
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = features;
    return doc;
}

}  // namespace sts
