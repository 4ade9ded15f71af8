#include "sts/survey.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace sts {

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// Locale-independent full-field numeric parses.
double parse_double_field(const std::string& s, std::size_t line,
                          const char* what) {
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || s.empty()) {
        fail_line(line, std::string("invalid ") + what + " '" + s + "'");
    }
    return value;
}

std::uint64_t parse_count_field(const std::string& s, std::size_t line,
                                const char* what) {
    std::uint64_t value = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || s.empty()) {
        fail_line(line, std::string("invalid ") + what + " '" + s +
                            "' (expected a non-negative integer)");
    }
    return value;
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

SurveyManifest SurveyManifest::from_records(std::string name,
                                            std::vector<ImageRecord> records,
                                            DistanceMetric metric) {
    SurveyManifest m;
    m.name_ = std::move(name);
    m.metric_ = metric;
    m.records_ = std::move(records);
    m.index_.reserve(m.records_.size());
    for (std::size_t i = 0; i < m.records_.size(); ++i) {
        const ImageRecord& r = m.records_[i];
        if (!is_valid(r.coord)) {
            throw std::runtime_error("record '" + r.image_id +
                                     "': coordinate out of range");
        }
        if (!m.index_.emplace(r.image_id, i).second) {
            throw std::runtime_error("duplicate image_id '" + r.image_id + "'");
        }
        m.totals_.n_images += 1;
        if (r.animal_count > 0) m.totals_.n_positive += 1;
        m.totals_.n_animals += r.animal_count;
    }
    return m;
}

const ImageRecord* SurveyManifest::find(const std::string& image_id) const {
    const auto it = index_.find(image_id);
    return it == index_.end() ? nullptr : &records_[it->second];
}

SurveyManifest parse_manifest(std::istream& source, DistanceMetric metric,
                              std::string name) {
    static constexpr const char* kHeader = "image_id,lat,lon,animal_count";
    std::string line;
    if (!read_line(source, line)) {
        throw std::runtime_error("line 1: missing header (expected '" +
                                 std::string(kHeader) + "')");
    }
    if (line != kHeader) {
        fail_line(1, "bad header '" + line + "' (expected '" + kHeader + "')");
    }

    std::vector<ImageRecord> records;
    std::unordered_map<std::string, std::size_t> seen;
    std::size_t lineno = 1;
    while (read_line(source, line)) {
        ++lineno;
        if (line.empty() && source.peek() == std::char_traits<char>::eof()) {
            break;  // trailing newline
        }
        const auto fields = split_fields(line);
        if (fields.size() != 4) {
            fail_line(lineno, "expected 4 columns, got " +
                                  std::to_string(fields.size()));
        }
        ImageRecord rec;
        rec.image_id = fields[0];
        if (rec.image_id.empty()) fail_line(lineno, "empty image_id");
        const double lat = parse_double_field(fields[1], lineno, "lat");
        const double lon = parse_double_field(fields[2], lineno, "lon");
        rec.coord = Coordinate{lat, lon};
        if (!is_valid(rec.coord)) {
            fail_line(lineno, "coordinate out of range: lat=" + fields[1] +
                                  " lon=" + fields[2]);
        }
        rec.animal_count = parse_count_field(fields[3], lineno, "animal_count");
        const auto it = seen.find(rec.image_id);
        if (it != seen.end()) {
            fail_line(lineno, "duplicate image_id '" + rec.image_id +
                                  "' (first seen on line " +
                                  std::to_string(it->second) + ")");
        }
        seen.emplace(rec.image_id, lineno);
        records.push_back(std::move(rec));
    }
    return SurveyManifest::from_records(std::move(name), std::move(records),
                                        metric);
}

void write_manifest(const SurveyManifest& manifest, std::ostream& sink) {
    sink << "image_id,lat,lon,animal_count\n";
    for (const ImageRecord& r : manifest.records()) {
        sink << r.image_id << ',' << format_double(r.coord.lat) << ','
             << format_double(r.coord.lon) << ',' << r.animal_count << '\n';
    }
    if (!sink) throw std::runtime_error("manifest write failed");
}

PredictionTable parse_predictions(std::istream& source) {
    static constexpr const char* kHeader = "image_id,predicted_count";
    std::string line;
    if (!read_line(source, line) || line != kHeader) {
        throw std::runtime_error(
            "line 1: bad predictions header (expected '" +
            std::string(kHeader) + "')");
    }
    PredictionTable table;
    std::size_t lineno = 1;
    while (read_line(source, line)) {
        ++lineno;
        if (line.empty() && source.peek() == std::char_traits<char>::eof()) {
            break;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 2) {
            fail_line(lineno, "expected 2 columns, got " +
                                  std::to_string(fields.size()));
        }
        if (fields[0].empty()) fail_line(lineno, "empty image_id");
        const std::uint64_t count =
            parse_count_field(fields[1], lineno, "predicted_count");
        if (!table.emplace(fields[0], count).second) {
            fail_line(lineno, "duplicate image_id '" + fields[0] + "'");
        }
    }
    return table;
}

}  // namespace sts
