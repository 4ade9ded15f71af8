#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sts/harness.hpp"
#include "sts/oracle.hpp"
#include "sts/search.hpp"
#include "sts/survey.hpp"
#include "sts/synth.hpp"
#include "sts/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

// Writes via a temp file + rename so readers never observe a partial file.
void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("cannot write " + path.string());
        }
    }
    fs::rename(tmp, path);
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        if (!std::cout) throw std::runtime_error("cannot write to stdout");
    } else {
        atomic_write(out_path, content);
    }
}

sts::BBox parse_bbox(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        std::size_t used = 0;
        parts.push_back(std::stod(field, &used));
        if (used != field.size()) {
            throw std::invalid_argument("bad --bbox component '" + field + "'");
        }
    }
    if (parts.size() != 4) {
        throw std::invalid_argument(
            "--bbox wants lat_min,lat_max,lon_min,lon_max");
    }
    return sts::BBox{parts[0], parts[1], parts[2], parts[3]};
}

struct SynthFlags {
    std::uint64_t n_images = 0;
    std::uint64_t n_clusters = 0;
    double positives_per_cluster = 1.0;
    double cluster_radius = 0.0;
    double animals_per_positive = 1.0;
    std::string bbox = "60,75,-90,-60";
};

void add_synth_options(CLI::App* cmd, SynthFlags* flags, bool required) {
    auto* n = cmd->add_option("--n-images", flags->n_images,
                              "Total number of survey images");
    if (required) n->required();
    cmd->add_option("--n-clusters", flags->n_clusters,
                    "Number of target clusters")
        ->capture_default_str();
    cmd->add_option("--positives-per-cluster", flags->positives_per_cluster,
                    "Mean positive images per cluster (Poisson)")
        ->capture_default_str();
    cmd->add_option("--cluster-radius", flags->cluster_radius,
                    "Cluster spread in degrees (Gaussian sigma)")
        ->capture_default_str();
    cmd->add_option("--animals-per-positive", flags->animals_per_positive,
                    "Mean animals per positive image (1 + Poisson)")
        ->capture_default_str();
    cmd->add_option("--bbox", flags->bbox,
                    "Survey region as lat_min,lat_max,lon_min,lon_max")
        ->capture_default_str();
}

sts::SynthParams to_params(const SynthFlags& flags, std::uint64_t seed) {
    sts::SynthParams p;
    p.n_images = flags.n_images;
    p.bbox = parse_bbox(flags.bbox);
    p.n_clusters = flags.n_clusters;
    p.positives_per_cluster_mean = flags.positives_per_cluster;
    p.cluster_radius = flags.cluster_radius;
    p.animals_per_positive_mean = flags.animals_per_positive;
    p.seed = seed;
    return p;
}

sts::SurveyManifest load_manifest(const std::string& path,
                                  sts::DistanceMetric metric) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open manifest " + path);
    return sts::parse_manifest(in, metric, path);
}

int cmd_synth(const SynthFlags& flags, std::uint64_t seed,
              const std::string& out_path) {
    bool truncated = false;
    const sts::SurveyManifest manifest =
        sts::generate(to_params(flags, seed), sts::DistanceMetric::DegreeEuclidean,
                      "synthetic", &truncated);
    std::ostringstream csv;
    sts::write_manifest(manifest, csv);
    emit(out_path, csv.str());
    const sts::SurveyTotals& t = manifest.totals();
    std::cerr << "synth: " << t.n_images << " images, " << t.n_positive
              << " positive, " << t.n_animals << " animals\n";
    if (truncated) {
        std::cerr << "synth: cluster process saturated the survey; every "
                     "image is positive (lower --n-clusters or "
                     "--positives-per-cluster for background)\n";
    }
    return 0;
}

struct RunFlags {
    std::string manifest_path;
    bool synth = false;
    SynthFlags synth_flags;
    std::string metric = "degree";
    std::string algo = "sts";
    std::uint64_t k = 10;
    double d = 0.6;
    std::uint64_t restarts = 1;
    std::string oracle = "ground-truth";
    std::string predictions_path;
    std::uint64_t threshold = 0;
    double detect_prob = 1.0;
    double fp_rate = 0.0;
    std::string stop = "exhaust";
    std::uint64_t repeats = 1;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string trace_dir;
};

int cmd_run(const RunFlags& flags) {
    const sts::DistanceMetric metric = sts::parse_metric(flags.metric);

    sts::SurveyManifest manifest = [&] {
        if (flags.synth) {
            bool truncated = false;
            sts::SurveyManifest m =
                sts::generate(to_params(flags.synth_flags, flags.seed), metric,
                              "synthetic", &truncated);
            if (truncated) {
                std::cerr << "run: synthetic cluster process saturated the "
                             "survey; every image is positive\n";
            }
            return m;
        }
        return load_manifest(flags.manifest_path, metric);
    }();

    const sts::DetectionOracle oracle = [&] {
        if (flags.oracle == "ground-truth") {
            return sts::DetectionOracle::ground_truth(manifest);
        }
        if (flags.oracle == "precomputed") {
            if (flags.predictions_path.empty()) {
                throw std::runtime_error(
                    "--oracle precomputed needs --predictions");
            }
            std::ifstream in(flags.predictions_path, std::ios::binary);
            if (!in) {
                throw std::runtime_error("cannot open predictions " +
                                         flags.predictions_path);
            }
            return sts::DetectionOracle::precomputed(
                manifest, sts::parse_predictions(in), flags.threshold);
        }
        if (flags.oracle == "noisy") {
            sts::NoisyParams p;
            p.detect_prob = flags.detect_prob;
            p.fp_rate = flags.fp_rate;
            p.threshold = flags.threshold;
            p.seed = flags.seed;
            return sts::DetectionOracle::noisy(manifest, p);
        }
        throw std::runtime_error("unknown oracle '" + flags.oracle + "'");
    }();

    sts::ExperimentSpec spec;
    spec.algorithm = flags.algo;
    spec.k = flags.k;
    spec.d = flags.d;
    spec.restarts = flags.restarts;
    spec.stop = sts::StopRule::parse(flags.stop);
    spec.repeats = flags.repeats;
    spec.base_seed = flags.seed;

    sts::TraceSink sink;
    if (!flags.trace_dir.empty()) {
        fs::create_directories(flags.trace_dir);
        sink = [&](std::uint64_t run_index, const sts::RunTrace& trace) {
            char name[32];
            std::snprintf(name, sizeof(name), "run-%04llu.ndjson",
                          static_cast<unsigned long long>(run_index));
            std::ostringstream lines;
            sts::write_trace_ndjson(trace, lines);
            atomic_write(fs::path(flags.trace_dir) / name, lines.str());
        };
    }

    const sts::AggregateStats stats =
        sts::run_experiment(manifest, oracle, spec, sink);
    emit(flags.out_path,
         sts::results_json(manifest, oracle, spec, stats).dump(2) + "\n");
    return 0;
}

nlohmann::ordered_json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::vector<std::string>& thresholds,
                const std::string& out_path) {
    std::map<std::string, double> max_abs_delta;
    for (const std::string& item : thresholds) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("--max-delta wants metric=value, got '" +
                                     item + "'");
        }
        const std::string name = item.substr(0, eq);
        if (name != "pct_images_analyzed" &&
            name != "pct_positive_images_found" &&
            name != "pct_animals_detected") {
            throw std::runtime_error("unknown metric '" + name + "'");
        }
        std::size_t used = 0;
        const std::string value_text = item.substr(eq + 1);
        const double value = std::stod(value_text, &used);
        if (used != value_text.size() || !(value >= 0.0)) {
            throw std::runtime_error("bad --max-delta value '" + value_text +
                                     "'");
        }
        max_abs_delta[name] = value;
    }
    const nlohmann::ordered_json report = sts::compare_results(
        load_json(path_a), load_json(path_b), max_abs_delta);
    emit(out_path, report.dump(2) + "\n");
    return 0;
}

int cmd_export_trace(const std::string& trace_path, const std::string& format,
                     const std::string& out_path) {
    if (format != "geojson") {
        throw std::runtime_error("unknown trace format '" + format + "'");
    }
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace " + trace_path);
    const std::vector<sts::TraceStep> steps = sts::parse_trace_ndjson(in);
    emit(out_path, sts::trace_geojson(steps).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social target search over geospatial survey imagery"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand(
        "synth", "Generate a clustered synthetic survey manifest");
    SynthFlags synth_flags;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    add_synth_options(synth, &synth_flags, /*required=*/true);
    synth->add_option("--seed", synth_seed, "Generator seed")
        ->capture_default_str();
    synth->add_option("--out", synth_out,
                      "Output manifest path (default: stdout)");

    // --- run ---
    auto* run = app.add_subcommand(
        "run", "Run a search experiment and report aggregate metrics");
    RunFlags run_flags;
    auto* manifest_opt = run->add_option("--manifest", run_flags.manifest_path,
                                         "Survey manifest CSV");
    auto* synth_opt = run->add_flag(
        "--synth", run_flags.synth,
        "Generate the survey instead of reading --manifest");
    manifest_opt->excludes(synth_opt);
    add_synth_options(run, &run_flags.synth_flags, /*required=*/false);
    run->add_option("--metric", run_flags.metric,
                    "Distance metric: degree or haversine-km")
        ->check(CLI::IsMember({"degree", "haversine-km"}))
        ->capture_default_str();
    run->add_option("--algo", run_flags.algo, "Search algorithm")
        ->check(CLI::IsMember({"sts", "random"}))
        ->capture_default_str();
    run->add_option("--k", run_flags.k,
                    "Batch size and neighbors per expansion")
        ->capture_default_str();
    run->add_option("--d", run_flags.d,
                    "Neighbor distance cutoff (metric units)")
        ->capture_default_str();
    run->add_option("--restarts", run_flags.restarts,
                    "Sampling+expansion passes per run")
        ->capture_default_str();
    run->add_option("--oracle", run_flags.oracle, "Detector stand-in")
        ->check(CLI::IsMember({"ground-truth", "precomputed", "noisy"}))
        ->capture_default_str();
    run->add_option("--predictions", run_flags.predictions_path,
                    "Predictions CSV for --oracle precomputed");
    run->add_option("--threshold", run_flags.threshold,
                    "Positive iff predicted count exceeds this")
        ->capture_default_str();
    run->add_option("--detect-prob", run_flags.detect_prob,
                    "Noisy oracle per-animal detection probability")
        ->capture_default_str();
    run->add_option("--fp-rate", run_flags.fp_rate,
                    "Noisy oracle mean false positives per image")
        ->capture_default_str();
    run->add_option("--stop", run_flags.stop,
                    "exhaust | budget:N | recall:F:positive_images|animals")
        ->capture_default_str();
    run->add_option("--repeats", run_flags.repeats, "Independent runs")
        ->capture_default_str();
    run->add_option("--seed", run_flags.seed,
                    "Base seed; run i uses seed + i")
        ->capture_default_str();
    run->add_option("--out", run_flags.out_path,
                    "Results JSON path (default: stdout)");
    run->add_option("--trace", run_flags.trace_dir,
                    "Directory for per-run NDJSON traces");

    // --- compare ---
    auto* compare = app.add_subcommand(
        "compare", "Diff the aggregate metrics of two results files");
    std::string compare_a, compare_b, compare_out;
    std::vector<std::string> compare_thresholds;
    compare->add_option("a", compare_a, "First results JSON")->required();
    compare->add_option("b", compare_b, "Second results JSON")->required();
    compare->add_option("--max-delta", compare_thresholds,
                        "metric=value pass threshold on |mean_a - mean_b| "
                        "(repeatable)");
    compare->add_option("--out", compare_out,
                        "Report path (default: stdout)");

    // --- export-trace ---
    auto* export_trace = app.add_subcommand(
        "export-trace", "Convert a run trace to GeoJSON for map rendering");
    std::string export_path, export_out;
    std::string export_format = "geojson";
    export_trace->add_option("trace", export_path, "NDJSON trace file")
        ->required();
    export_trace->add_option("--format", export_format, "Output format")
        ->check(CLI::IsMember({"geojson"}))
        ->capture_default_str();
    export_trace->add_option("--out", export_out,
                             "Output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return cmd_synth(synth_flags, synth_seed, synth_out);
        }
        if (run->parsed()) {
            if (!run_flags.synth && run_flags.manifest_path.empty()) {
                throw std::runtime_error("need --manifest PATH or --synth");
            }
            return cmd_run(run_flags);
        }
        if (compare->parsed()) {
            return cmd_compare(compare_a, compare_b, compare_thresholds,
                               compare_out);
        }
        if (export_trace->parsed()) {
            return cmd_export_trace(export_path, export_format, export_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
