#include "sts/harness.hpp"

#include <cmath>
#include <stdexcept>

namespace sts {

namespace {

MetricStats stats_of(const std::vector<double>& values) {
    MetricStats s;
    if (values.empty()) return s;
    s.min = values.front();
    s.max = values.front();
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        if (v < s.min) s.min = v;
        if (v > s.max) s.max = v;
    }
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            const double dev = v - s.mean;
            ss += dev * dev;
        }
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

const char* oracle_kind_name(DetectionOracle::Kind kind) {
    switch (kind) {
        case DetectionOracle::Kind::GroundTruth:
            return "ground-truth";
        case DetectionOracle::Kind::Precomputed:
            return "precomputed";
        case DetectionOracle::Kind::Noisy:
            return "noisy";
    }
    return "?";
}

}  // namespace

AggregateStats run_experiment(const SurveyManifest& manifest,
                              const DetectionOracle& oracle,
                              const ExperimentSpec& spec,
                              const TraceSink& sink) {
    if (spec.repeats < 1) {
        throw std::invalid_argument("run_experiment: repeats must be >= 1");
    }
    if (spec.algorithm != "sts" && spec.algorithm != "random") {
        throw std::invalid_argument("run_experiment: unknown algorithm '" +
                                    spec.algorithm + "'");
    }

    AggregateStats agg;
    agg.per_run.reserve(spec.repeats);
    std::vector<double> analyzed, positives, animals;
    analyzed.reserve(spec.repeats);
    positives.reserve(spec.repeats);
    animals.reserve(spec.repeats);

    for (std::uint64_t i = 0; i < spec.repeats; ++i) {
        const std::uint64_t seed = spec.base_seed + i;
        RunTrace trace;
        try {
            if (spec.algorithm == "sts") {
                StsConfig config;
                config.k = spec.k;
                config.d = spec.d;
                config.restarts = spec.restarts;
                config.seed = seed;
                config.stop = spec.stop;
                trace = run_sts(manifest, oracle, config);
            } else {
                trace = run_random_search(manifest, oracle, seed, spec.stop);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("run " + std::to_string(i) + " (seed " +
                                     std::to_string(seed) +
                                     ") failed: " + e.what());
        }
        const RunMetrics m = compute_metrics(trace, manifest);
        analyzed.push_back(m.pct_images_analyzed);
        positives.push_back(m.pct_positive_images_found);
        animals.push_back(m.pct_animals_detected);
        agg.per_run.push_back(m);
        if (sink) sink(i, trace);
    }

    agg.pct_images_analyzed = stats_of(analyzed);
    agg.pct_positive_images_found = stats_of(positives);
    agg.pct_animals_detected = stats_of(animals);
    return agg;
}

double expected_random_fraction(std::uint64_t n_images,
                                std::uint64_t n_positive,
                                double recall_target) {
    if (n_positive < 1 || n_positive > n_images) {
        throw std::invalid_argument(
            "expected_random_fraction: need 0 < n_positive <= n_images");
    }
    if (!(recall_target > 0.0 && recall_target <= 1.0)) {
        throw std::invalid_argument(
            "expected_random_fraction: recall_target must be in (0, 1]");
    }
    const std::uint64_t r = min_count_for_recall(recall_target, n_positive);
    return static_cast<double>(r) * static_cast<double>(n_images + 1) /
           (static_cast<double>(n_positive + 1) *
            static_cast<double>(n_images));
}

nlohmann::ordered_json results_json(const SurveyManifest& manifest,
                                    const DetectionOracle& oracle,
                                    const ExperimentSpec& spec,
                                    const AggregateStats& stats) {
    nlohmann::ordered_json experiment;
    experiment["manifest"] = {
        {"name", manifest.name()},
        {"metric", metric_name(manifest.metric())},
        {"n_images", manifest.totals().n_images},
        {"n_positive", manifest.totals().n_positive},
        {"n_animals", manifest.totals().n_animals},
    };
    experiment["algorithm"] = spec.algorithm;
    if (spec.algorithm == "sts") {
        experiment["k"] = spec.k;
        experiment["d"] = spec.d;
        experiment["restarts"] = spec.restarts;
    }
    nlohmann::ordered_json oracle_echo;
    oracle_echo["kind"] = oracle_kind_name(oracle.kind());
    if (oracle.kind() == DetectionOracle::Kind::Precomputed) {
        oracle_echo["threshold"] = oracle.threshold();
    } else if (oracle.kind() == DetectionOracle::Kind::Noisy) {
        const NoisyParams& p = oracle.noisy_params();
        oracle_echo["detect_prob"] = p.detect_prob;
        oracle_echo["fp_rate"] = p.fp_rate;
        oracle_echo["threshold"] = p.threshold;
        oracle_echo["seed"] = p.seed;
    }
    experiment["oracle"] = oracle_echo;
    experiment["stop"] = spec.stop.to_string();
    experiment["repeats"] = spec.repeats;
    experiment["base_seed"] = spec.base_seed;

    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < stats.per_run.size(); ++i) {
        const RunMetrics& m = stats.per_run[i];
        runs.push_back({
            {"run_index", i},
            {"seed", spec.base_seed + i},
            {"pct_images_analyzed", m.pct_images_analyzed},
            {"pct_positive_images_found", m.pct_positive_images_found},
            {"pct_animals_detected", m.pct_animals_detected},
            {"n_evaluated", m.n_evaluated},
            {"recall_unreachable", m.recall_unreachable},
        });
    }

    auto metric_json = [](const MetricStats& s) {
        return nlohmann::ordered_json{
            {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
    };
    nlohmann::ordered_json aggregate;
    aggregate["pct_images_analyzed"] = metric_json(stats.pct_images_analyzed);
    aggregate["pct_positive_images_found"] =
        metric_json(stats.pct_positive_images_found);
    aggregate["pct_animals_detected"] =
        metric_json(stats.pct_animals_detected);

    nlohmann::ordered_json doc;
    doc["experiment"] = experiment;
    doc["runs"] = runs;
    doc["aggregate"] = aggregate;
    return doc;
}

nlohmann::ordered_json compare_results(
    const nlohmann::ordered_json& a, const nlohmann::ordered_json& b,
    const std::map<std::string, double>& max_abs_delta) {
    const auto& ea = a.at("experiment");
    const auto& eb = b.at("experiment");
    if (ea.at("manifest") != eb.at("manifest")) {
        throw std::runtime_error(
            "compare: results describe different manifests");
    }
    if (ea.at("stop") != eb.at("stop")) {
        throw std::runtime_error(
            "compare: results use different stop rules");
    }

    auto side_echo = [](const nlohmann::ordered_json& e) {
        return nlohmann::ordered_json{
            {"algorithm", e.at("algorithm")},
            {"repeats", e.at("repeats")},
            {"base_seed", e.at("base_seed")},
        };
    };

    const double na = a.at("experiment").at("repeats").get<double>();
    const double nb = b.at("experiment").at("repeats").get<double>();

    nlohmann::ordered_json metrics;
    bool all_pass = true;
    for (const char* name : {"pct_images_analyzed",
                             "pct_positive_images_found",
                             "pct_animals_detected"}) {
        const auto& ma = a.at("aggregate").at(name);
        const auto& mb = b.at("aggregate").at(name);
        const double mean_a = ma.at("mean").get<double>();
        const double mean_b = mb.at("mean").get<double>();
        const double sa = ma.at("std").get<double>();
        const double sb = mb.at("std").get<double>();
        const double denom = na + nb - 2.0;
        const double pooled =
            denom > 0.0
                ? std::sqrt(((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) /
                            denom)
                : 0.0;
        nlohmann::ordered_json entry{
            {"mean_a", mean_a},
            {"mean_b", mean_b},
            {"delta", mean_a - mean_b},
            {"pooled_std", pooled},
        };
        const auto thr = max_abs_delta.find(name);
        if (thr != max_abs_delta.end()) {
            const bool pass = std::fabs(mean_a - mean_b) <= thr->second;
            entry["max_abs_delta"] = thr->second;
            entry["pass"] = pass;
            all_pass = all_pass && pass;
        }
        metrics[name] = entry;
    }

    nlohmann::ordered_json doc;
    doc["a"] = side_echo(ea);
    doc["b"] = side_echo(eb);
    doc["metrics"] = metrics;
    doc["verdict"] = all_pass ? "pass" : "fail";
    return doc;
}

}  // namespace sts
