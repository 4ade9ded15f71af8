#pragma once

// Shared test helpers: an independent reference implementation of the
// two-phase search (brute-force neighbor scan, no spatial index) and
// checkers for the run-trace invariants. Kept deliberately naive so the
// production engine is validated against first-principles code.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sts/geo.hpp"
#include "sts/oracle.hpp"
#include "sts/rng.hpp"
#include "sts/search.hpp"
#include "sts/survey.hpp"

namespace sts::testing {

// Same contract as run_sts, implemented without a KD-tree: neighbors come
// from a linear scan sorted by (distance, image_id). Shares only the RNG
// primitives with production code.
inline RunTrace reference_sts(const SurveyManifest& manifest,
                              const DetectionOracle& oracle,
                              const StsConfig& config) {
    const auto& records = manifest.records();
    const DistanceMetric metric = manifest.metric();

    std::vector<std::size_t> by_id(records.size());
    for (std::size_t i = 0; i < by_id.size(); ++i) by_id[i] = i;
    std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
        return records[a].image_id < records[b].image_id;
    });
    std::vector<bool> alive(records.size(), true);
    std::size_t n_alive = records.size();

    const std::uint64_t recall_total =
        config.stop.basis == StopRule::RecallBasis::PositiveImages
            ? manifest.totals().n_positive
            : manifest.totals().n_animals;
    std::uint64_t found_basis = 0;
    bool reached = false;

    Rng rng(derive_seed(config.seed, "phase1-sampling"));
    RunTrace trace;
    trace.algorithm = "sts";
    trace.seed = config.seed;
    trace.stop = config.stop;
    trace.sts_config = config;
    trace.manifest_totals = manifest.totals();

    bool stopped = false;
    auto evaluate = [&](std::size_t idx, Phase phase,
                        std::optional<std::string> parent) {
        const ImageRecord& rec = records[idx];
        const DetectionResult result = oracle.evaluate(rec.image_id);
        trace.steps.push_back(TraceStep{trace.steps.size(), rec.image_id,
                                        rec.coord, phase, std::move(parent),
                                        result});
        if (rec.animal_count > 0) {
            found_basis += config.stop.basis ==
                                   StopRule::RecallBasis::PositiveImages
                               ? 1
                               : rec.animal_count;
        }
        switch (config.stop.kind) {
            case StopRule::Kind::Exhaust:
                break;
            case StopRule::Kind::Budget:
                if (trace.steps.size() >= config.stop.max_evaluations) {
                    stopped = true;
                }
                break;
            case StopRule::Kind::RecallTarget:
                if (recall_total > 0 &&
                    double(found_basis) / double(recall_total) >=
                        config.stop.recall_fraction) {
                    reached = true;
                    stopped = true;
                }
                break;
        }
        return result;
    };

    for (std::uint64_t pass = 0; pass < config.restarts && !stopped; ++pass) {
        if (n_alive == 0) break;
        std::deque<std::size_t> queue;
        while (queue.empty() && n_alive > 0 && !stopped) {
            std::vector<std::size_t> cands;
            for (std::size_t idx : by_id) {
                if (alive[idx]) cands.push_back(idx);
            }
            const std::size_t batch =
                std::min<std::size_t>(config.k, cands.size());
            partial_shuffle(cands, batch, rng);
            for (std::size_t i = 0; i < batch; ++i) alive[cands[i]] = false;
            n_alive -= batch;
            for (std::size_t i = 0; i < batch && !stopped; ++i) {
                if (evaluate(cands[i], Phase::Sample, std::nullopt)
                        .is_positive) {
                    queue.push_back(cands[i]);
                }
            }
        }
        while (!queue.empty() && !stopped) {
            const std::size_t parent = queue.front();
            queue.pop_front();
            std::vector<std::pair<double, std::size_t>> hits;
            for (std::size_t idx : by_id) {
                if (!alive[idx]) continue;
                const double dist = distance(metric, records[parent].coord,
                                             records[idx].coord);
                if (dist <= config.d) hits.emplace_back(dist, idx);
            }
            std::sort(hits.begin(), hits.end(),
                      [&](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first < b.first;
                          return records[a.second].image_id <
                                 records[b.second].image_id;
                      });
            if (hits.size() > config.k) hits.resize(config.k);
            for (const auto& [dist, idx] : hits) {
                alive[idx] = false;
                n_alive -= 1;
            }
            for (const auto& [dist, idx] : hits) {
                if (stopped) break;
                if (evaluate(idx, Phase::Bfs, records[parent].image_id)
                        .is_positive) {
                    queue.push_back(idx);
                }
            }
        }
    }
    trace.recall_unreachable =
        config.stop.kind == StopRule::Kind::RecallTarget && !reached;
    return trace;
}

inline bool steps_equal(const TraceStep& a, const TraceStep& b) {
    return a.step_index == b.step_index && a.image_id == b.image_id &&
           a.coord == b.coord && a.phase == b.phase &&
           a.parent_image_id == b.parent_image_id &&
           a.result.predicted_count == b.result.predicted_count &&
           a.result.is_positive == b.result.is_positive;
}

inline bool traces_equal(const RunTrace& a, const RunTrace& b) {
    if (a.steps.size() != b.steps.size()) return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        if (!steps_equal(a.steps[i], b.steps[i])) return false;
    }
    return a.recall_unreachable == b.recall_unreachable;
}

// Checks every structural trace invariant; returns human-readable
// violations (empty means the trace is sound).
inline std::vector<std::string> trace_violations(const RunTrace& trace,
                                                 const SurveyManifest& manifest,
                                                 const StsConfig& config) {
    std::vector<std::string> bad;
    std::map<std::string, std::size_t> first_seen;
    std::map<std::string, bool> was_positive;

    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const TraceStep& step = trace.steps[i];
        if (step.step_index != i) {
            bad.push_back("step " + std::to_string(i) + ": index mismatch");
        }
        const ImageRecord* rec = manifest.find(step.image_id);
        if (rec == nullptr) {
            bad.push_back("step " + std::to_string(i) + ": unknown id " +
                          step.image_id);
            continue;
        }
        if (!(rec->coord == step.coord)) {
            bad.push_back("step " + std::to_string(i) + ": coord mismatch");
        }
        if (first_seen.count(step.image_id)) {
            bad.push_back("visits-once violated by " + step.image_id);
        }
        first_seen[step.image_id] = i;
        was_positive[step.image_id] = step.result.is_positive;

        if (step.phase == Phase::Sample) {
            if (step.parent_image_id) {
                bad.push_back("step " + std::to_string(i) +
                              ": sample step has a parent");
            }
        } else {
            if (!step.parent_image_id) {
                bad.push_back("step " + std::to_string(i) +
                              ": bfs step lacks a parent");
                continue;
            }
            const std::string& parent = *step.parent_image_id;
            const auto seen = first_seen.find(parent);
            if (seen == first_seen.end() || seen->second >= i) {
                bad.push_back("step " + std::to_string(i) +
                              ": parent not evaluated earlier");
            } else if (!was_positive[parent]) {
                bad.push_back("step " + std::to_string(i) +
                              ": parent was not positive");
            }
            const ImageRecord* prec = manifest.find(parent);
            if (prec != nullptr &&
                distance(manifest.metric(), prec->coord, step.coord) >
                    config.d) {
                bad.push_back("step " + std::to_string(i) +
                              ": neighbor beyond d");
            }
        }
    }
    if (!trace.steps.empty() && trace.steps[0].phase != Phase::Sample) {
        bad.push_back("trace does not start with a sample step");
    }

    // FIFO: the sequence of distinct BFS parent blocks must be an in-order
    // subsequence of the positive evaluations, and a parent expands once.
    std::vector<std::string> positive_order;
    for (const TraceStep& step : trace.steps) {
        if (step.result.is_positive) positive_order.push_back(step.image_id);
    }
    std::vector<std::string> parent_blocks;
    for (const TraceStep& step : trace.steps) {
        if (step.phase != Phase::Bfs) continue;
        if (parent_blocks.empty() ||
            parent_blocks.back() != *step.parent_image_id) {
            parent_blocks.push_back(*step.parent_image_id);
        }
    }
    for (std::size_t i = 1; i < parent_blocks.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (parent_blocks[i] == parent_blocks[j]) {
                bad.push_back("parent " + parent_blocks[i] +
                              " expanded in two separate blocks");
            }
        }
    }
    std::size_t cursor = 0;
    for (const std::string& parent : parent_blocks) {
        bool found = false;
        while (cursor < positive_order.size()) {
            if (positive_order[cursor++] == parent) {
                found = true;
                break;
            }
        }
        if (!found) {
            bad.push_back("fifo order violated at parent " + parent);
            break;
        }
    }
    return bad;
}

}  // namespace sts::testing
