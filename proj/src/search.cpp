#include "sts/search.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "sts/kdtree.hpp"
#include "sts/rng.hpp"

namespace sts {

StopRule StopRule::exhaust() { return StopRule{}; }

StopRule StopRule::recall(double fraction, RecallBasis basis) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("recall fraction must be in (0, 1]");
    }
    StopRule r;
    r.kind = Kind::RecallTarget;
    r.recall_fraction = fraction;
    r.basis = basis;
    return r;
}

StopRule StopRule::budget(std::uint64_t max_evaluations) {
    if (max_evaluations < 1) {
        throw std::invalid_argument("budget must be >= 1");
    }
    StopRule r;
    r.kind = Kind::Budget;
    r.max_evaluations = max_evaluations;
    return r;
}

std::string StopRule::to_string() const {
    switch (kind) {
        case Kind::Exhaust:
            return "exhaust";
        case Kind::Budget:
            return "budget:" + std::to_string(max_evaluations);
        case Kind::RecallTarget: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", recall_fraction);
            return std::string("recall:") + buf + ":" +
                   (basis == RecallBasis::PositiveImages ? "positive_images"
                                                         : "animals");
        }
    }
    throw std::logic_error("unreachable");
}

StopRule StopRule::parse(const std::string& text) {
    if (text == "exhaust") return exhaust();
    if (text.rfind("budget:", 0) == 0) {
        const std::string n = text.substr(7);
        std::size_t used = 0;
        std::uint64_t value = 0;
        try {
            value = std::stoull(n, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad stop rule '" + text + "'");
        }
        if (used != n.size()) {
            throw std::invalid_argument("bad stop rule '" + text + "'");
        }
        return budget(value);
    }
    if (text.rfind("recall:", 0) == 0) {
        const std::size_t colon = text.find(':', 7);
        if (colon == std::string::npos) {
            throw std::invalid_argument("bad stop rule '" + text +
                                        "' (expected recall:F:basis)");
        }
        const std::string frac_text = text.substr(7, colon - 7);
        const std::string basis_text = text.substr(colon + 1);
        std::size_t used = 0;
        double fraction = 0.0;
        try {
            fraction = std::stod(frac_text, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad stop rule '" + text + "'");
        }
        if (used != frac_text.size()) {
            throw std::invalid_argument("bad stop rule '" + text + "'");
        }
        RecallBasis basis;
        if (basis_text == "positive_images") {
            basis = RecallBasis::PositiveImages;
        } else if (basis_text == "animals") {
            basis = RecallBasis::Animals;
        } else {
            throw std::invalid_argument("bad recall basis '" + basis_text + "'");
        }
        return recall(fraction, basis);
    }
    throw std::invalid_argument("bad stop rule '" + text + "'");
}

bool operator==(const StopRule& a, const StopRule& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case StopRule::Kind::Exhaust:
            return true;
        case StopRule::Kind::Budget:
            return a.max_evaluations == b.max_evaluations;
        case StopRule::Kind::RecallTarget:
            return a.recall_fraction == b.recall_fraction && a.basis == b.basis;
    }
    return false;
}

std::uint64_t min_count_for_recall(double fraction, std::uint64_t total) {
    if (total == 0) return 1;  // never reachable: found can only stay at 0
    const double t = static_cast<double>(total);
    auto reaches = [&](std::uint64_t count) {
        return static_cast<double>(count) / t >= fraction;
    };
    std::uint64_t r =
        static_cast<std::uint64_t>(std::ceil(fraction * t));
    if (r < 1) r = 1;
    if (r > total) r = total;
    while (r > 1 && reaches(r - 1)) --r;
    while (r < total && !reaches(r)) ++r;
    return r;
}

namespace {

// Shared evaluation/termination bookkeeping for both algorithms.
class StopTracker {
public:
    StopTracker(const StopRule& rule, const SurveyTotals& totals)
        : rule_(rule) {
        if (rule_.kind == StopRule::Kind::RecallTarget) {
            const std::uint64_t total =
                rule_.basis == StopRule::RecallBasis::PositiveImages
                    ? totals.n_positive
                    : totals.n_animals;
            reachable_ = total > 0;
            needed_ = min_count_for_recall(rule_.recall_fraction, total);
        }
    }

    // Record one evaluated image; returns true when the run must end now.
    bool record(const ImageRecord& record, std::uint64_t n_evaluated) {
        if (record.animal_count > 0) {
            found_positive_images_ += 1;
            found_animals_ += record.animal_count;
        }
        switch (rule_.kind) {
            case StopRule::Kind::Exhaust:
                return false;
            case StopRule::Kind::Budget:
                return n_evaluated >= rule_.max_evaluations;
            case StopRule::Kind::RecallTarget: {
                const std::uint64_t found =
                    rule_.basis == StopRule::RecallBasis::PositiveImages
                        ? found_positive_images_
                        : found_animals_;
                if (found >= needed_) {
                    reached_ = true;
                    return true;
                }
                return false;
            }
        }
        return false;
    }

    bool recall_unreachable() const {
        return rule_.kind == StopRule::Kind::RecallTarget &&
               (!reachable_ || !reached_);
    }

private:
    StopRule rule_;
    std::uint64_t needed_ = 0;
    std::uint64_t found_positive_images_ = 0;
    std::uint64_t found_animals_ = 0;
    bool reachable_ = true;
    bool reached_ = false;
};

const ImageRecord& record_or_throw(const SurveyManifest& manifest,
                                   const std::string& image_id) {
    const ImageRecord* rec = manifest.find(image_id);
    if (rec == nullptr) {
        throw std::runtime_error("manifest has no record for image_id '" +
                                 image_id + "'");
    }
    return *rec;
}

}  // namespace

RunMetrics compute_metrics(const RunTrace& trace,
                           const SurveyManifest& manifest) {
    const SurveyTotals& totals = manifest.totals();
    std::uint64_t found_positive = 0;
    std::uint64_t found_animals = 0;
    for (const TraceStep& step : trace.steps) {
        const ImageRecord& rec = record_or_throw(manifest, step.image_id);
        if (rec.animal_count > 0) {
            found_positive += 1;
            found_animals += rec.animal_count;
        }
    }
    RunMetrics m;
    m.n_evaluated = trace.n_evaluated();
    m.recall_unreachable = trace.recall_unreachable;
    m.pct_images_analyzed =
        totals.n_images == 0
            ? 0.0
            : static_cast<double>(m.n_evaluated) /
                  static_cast<double>(totals.n_images);
    m.pct_positive_images_found =
        totals.n_positive == 0
            ? 1.0
            : static_cast<double>(found_positive) /
                  static_cast<double>(totals.n_positive);
    m.pct_animals_detected =
        totals.n_animals == 0
            ? 1.0
            : static_cast<double>(found_animals) /
                  static_cast<double>(totals.n_animals);
    return m;
}

RunTrace run_sts(const SurveyManifest& manifest, const DetectionOracle& oracle,
                 const StsConfig& config) {
    if (manifest.records().empty()) {
        throw std::invalid_argument("run_sts: empty manifest");
    }
    if (config.k < 1) throw std::invalid_argument("run_sts: k must be >= 1");
    if (!(config.d >= 0.0)) {
        throw std::invalid_argument("run_sts: d must be >= 0");
    }
    if (config.restarts < 1) {
        throw std::invalid_argument("run_sts: restarts must be >= 1");
    }

    const auto& records = manifest.records();
    const DistanceMetric metric = manifest.metric();

    // Candidate bookkeeping: indices into `records`, sorted ascending by
    // image_id (the canonical pre-shuffle order), plus an alive mask.
    std::vector<std::size_t> by_id(records.size());
    for (std::size_t i = 0; i < by_id.size(); ++i) by_id[i] = i;
    std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
        return records[a].image_id < records[b].image_id;
    });
    std::vector<char> alive(records.size(), 1);
    std::size_t n_alive = records.size();

    Rng sample_rng(derive_seed(config.seed, "phase1-sampling"));
    StopTracker stop(config.stop, manifest.totals());

    RunTrace trace;
    trace.algorithm = "sts";
    trace.seed = config.seed;
    trace.stop = config.stop;
    trace.sts_config = config;
    trace.manifest_totals = manifest.totals();

    bool stopped = false;
    auto evaluate_step = [&](std::size_t rec_index, Phase phase,
                             const std::optional<std::string>& parent) {
        const ImageRecord& rec = records[rec_index];
        const DetectionResult result = oracle.evaluate(rec.image_id);
        trace.steps.push_back(TraceStep{trace.steps.size(), rec.image_id,
                                        rec.coord, phase, parent, result});
        if (stop.record(rec, trace.steps.size())) stopped = true;
        return result;
    };

    for (std::uint64_t pass = 0; pass < config.restarts && !stopped; ++pass) {
        if (n_alive == 0) break;

        // Phase 1: sample batches without replacement until a positive shows
        // up (or the candidates run out).
        std::deque<std::size_t> queue;
        while (queue.empty() && n_alive > 0 && !stopped) {
            std::vector<std::size_t> candidates;
            candidates.reserve(n_alive);
            for (std::size_t idx : by_id) {
                if (alive[idx]) candidates.push_back(idx);
            }
            const std::size_t batch =
                std::min<std::size_t>(config.k, candidates.size());
            partial_shuffle(candidates, batch, sample_rng);
            for (std::size_t i = 0; i < batch; ++i) {
                alive[candidates[i]] = 0;
            }
            n_alive -= batch;
            for (std::size_t i = 0; i < batch && !stopped; ++i) {
                const std::size_t idx = candidates[i];
                const DetectionResult result =
                    evaluate_step(idx, Phase::Sample, std::nullopt);
                if (result.is_positive) queue.push_back(idx);
            }
        }

        // Phase 2: FIFO BFS over the d-neighbor graph of the remaining
        // candidates, one KD-tree rebuild per expansion.
        while (!queue.empty() && !stopped) {
            std::vector<IndexedPoint> remaining;
            remaining.reserve(n_alive);
            for (std::size_t idx : by_id) {
                if (alive[idx]) {
                    remaining.push_back(
                        IndexedPoint{records[idx].image_id, records[idx].coord});
                }
            }
            const KdTree tree = KdTree::build(std::move(remaining));
            const std::size_t parent_index = queue.front();
            queue.pop_front();
            const ImageRecord& parent = records[parent_index];
            const std::vector<Neighbor> neighbors = tree.query_knn_within(
                parent.coord, config.k, config.d, metric);
            for (const Neighbor& n : neighbors) {
                // The parent was removed from the candidates before this
                // query, so it can never return itself.
                assert(n.point.image_id != parent.image_id);
                const ImageRecord* rec = manifest.find(n.point.image_id);
                alive[rec - records.data()] = 0;
                n_alive -= 1;
            }
            for (const Neighbor& n : neighbors) {
                if (stopped) break;
                const ImageRecord* rec = manifest.find(n.point.image_id);
                const std::size_t idx =
                    static_cast<std::size_t>(rec - records.data());
                const DetectionResult result =
                    evaluate_step(idx, Phase::Bfs, parent.image_id);
                if (result.is_positive) queue.push_back(idx);
            }
        }
    }

    trace.recall_unreachable = !stopped && stop.recall_unreachable();
    return trace;
}

RunTrace run_random_search(const SurveyManifest& manifest,
                           const DetectionOracle& oracle, std::uint64_t seed,
                           const StopRule& stop_rule) {
    if (manifest.records().empty()) {
        throw std::invalid_argument("run_random_search: empty manifest");
    }
    const auto& records = manifest.records();
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].image_id < records[b].image_id;
    });
    Rng rng(derive_seed(seed, "random-search"));
    shuffle(order, rng);

    StopTracker stop(stop_rule, manifest.totals());
    RunTrace trace;
    trace.algorithm = "random";
    trace.seed = seed;
    trace.stop = stop_rule;
    trace.manifest_totals = manifest.totals();

    bool stopped = false;
    for (std::size_t idx : order) {
        const ImageRecord& rec = records[idx];
        const DetectionResult result = oracle.evaluate(rec.image_id);
        trace.steps.push_back(TraceStep{trace.steps.size(), rec.image_id,
                                        rec.coord, Phase::Sample, std::nullopt,
                                        result});
        if (stop.record(rec, trace.steps.size())) {
            stopped = true;
            break;
        }
    }
    trace.recall_unreachable = !stopped && stop.recall_unreachable();
    return trace;
}

}  // namespace sts
