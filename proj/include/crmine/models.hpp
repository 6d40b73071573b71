#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "crmine/dataset.hpp"
#include "crmine/rules.hpp"

namespace crmine {

enum class ModelKind : std::uint8_t { RuleList, RuleSet };

// Correction model: an ordered rule list (first match applies) or a rule set
// (matching deltas averaged). Same container, different application.
struct CorrectionModel {
    ModelKind kind = ModelKind::RuleSet;
    std::vector<CorrectionRule> rules;
};

// CRL: the minimum-index matching rule adds its delta; no match leaves the
// score unchanged.
inline double crl_apply(const std::vector<CorrectionRule>& list, const Instance& inst) {
    for (const auto& rule : list)
        if (rule.itemset.is_subset_of(inst.items)) return inst.score + rule.delta;
    return inst.score;
}

// CRS: the average delta of all matching rules is added. Matched deltas are
// summed in ascending value order so the result is invariant under any
// permutation of the set.
inline double crs_apply(const std::vector<CorrectionRule>& set, const Instance& inst) {
    std::vector<double> deltas;
    for (const auto& rule : set)
        if (rule.itemset.is_subset_of(inst.items)) deltas.push_back(rule.delta);
    if (deltas.empty()) return inst.score;
    std::sort(deltas.begin(), deltas.end());
    double sum = 0.0;
    for (double d : deltas) sum += d;
    return inst.score + sum / static_cast<double>(deltas.size());
}

inline double apply_model(const CorrectionModel& model, const Instance& inst) {
    return model.kind == ModelKind::RuleList ? crl_apply(model.rules, inst)
                                             : crs_apply(model.rules, inst);
}

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double log_loss = 0.0;
    std::int64_t n = 0;
};

// Metrics on corrected scores (or raw scores when model is null). Positive
// class is label 1. Undefined precision/recall/f1 fall back to 0. Log loss
// maps scores to probabilities via p = (s+1)/2 clipped to [eps, 1-eps].
inline Metrics evaluate(const Dataset& ds, const CorrectionModel* model = nullptr) {
    if (ds.size() == 0) throw DataError("evaluate: empty dataset");
    constexpr double kEps = 1e-12;
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double loss = 0.0;
    for (const auto& inst : ds.instances) {
        const double s = model ? apply_model(*model, inst) : inst.score;
        const int pred = predicted_label(s);
        if (pred == 1)
            (inst.label == 1 ? tp : fp)++;
        else
            (inst.label == -1 ? tn : fn)++;
        double p = (s + 1.0) / 2.0;
        p = std::min(1.0 - kEps, std::max(kEps, p));
        loss += inst.label == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    Metrics m;
    m.n = static_cast<std::int64_t>(ds.size());
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.n);
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.log_loss = loss / static_cast<double>(m.n);
    return m;
}

enum class ObjectiveKind : std::uint8_t { Accuracy, F1, LogLoss };

inline ObjectiveKind objective_from_name(const std::string& s) {
    if (s == "accuracy") return ObjectiveKind::Accuracy;
    if (s == "f1") return ObjectiveKind::F1;
    if (s == "log_loss") return ObjectiveKind::LogLoss;
    throw DataError("unknown objective: " + s);
}

inline double objective_value(ObjectiveKind kind, const Metrics& m) {
    switch (kind) {
        case ObjectiveKind::Accuracy: return m.accuracy;
        case ObjectiveKind::F1: return m.f1;
        case ObjectiveKind::LogLoss: return m.log_loss;
    }
    return 0.0;
}

inline bool objective_improves(ObjectiveKind kind, double candidate, double incumbent) {
    return kind == ObjectiveKind::LogLoss ? candidate < incumbent : candidate > incumbent;
}

// Greedy model construction: repeatedly add the candidate rule whose
// insertion gives the best strict objective improvement on the build data
// (CRL candidates are appended at the end). Stops at the size limit or when
// nothing improves. Ties go to the lower candidate index.
inline CorrectionModel greedy_build(const std::vector<CorrectionRule>& candidates,
                                    const Dataset& ds, ObjectiveKind objective,
                                    std::size_t size_limit, ModelKind kind) {
    CorrectionModel model;
    model.kind = kind;
    if (ds.size() == 0) throw DataError("greedy_build: empty dataset");

    std::vector<char> used(candidates.size(), 0);
    double current = objective_value(objective, evaluate(ds, &model));

    while (model.rules.size() < size_limit) {
        std::size_t best_idx = candidates.size();
        double best_value = current;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            model.rules.push_back(candidates[c]);
            const double v = objective_value(objective, evaluate(ds, &model));
            model.rules.pop_back();
            if (objective_improves(objective, v, best_value)) {
                best_value = v;
                best_idx = c;
            }
        }
        if (best_idx == candidates.size()) break;
        model.rules.push_back(candidates[best_idx]);
        used[best_idx] = 1;
        current = best_value;
    }
    return model;
}

struct RegionRecovery {
    double coverage = 0.0;
    double jaccard = 0.0;
};

// For each ground-truth hit set G: coverage is the best |G n R|/|G| over
// mined hit sets R, jaccard the best |G n R|/|G u R|. Hit sets must be
// ascending index lists.
inline std::vector<RegionRecovery> coverage_jaccard(
    const std::vector<std::vector<std::uint32_t>>& truth_hits,
    const std::vector<std::vector<std::uint32_t>>& mined_hits) {
    std::vector<RegionRecovery> out;
    out.reserve(truth_hits.size());
    for (const auto& g : truth_hits) {
        RegionRecovery rec;
        if (!g.empty()) {
            for (const auto& r : mined_hits) {
                std::size_t common = 0, i = 0, j = 0;
                while (i < g.size() && j < r.size()) {
                    if (g[i] < r[j])
                        ++i;
                    else if (r[j] < g[i])
                        ++j;
                    else {
                        ++common;
                        ++i;
                        ++j;
                    }
                }
                const double cov = static_cast<double>(common) / static_cast<double>(g.size());
                const std::size_t uni = g.size() + r.size() - common;
                const double jac = uni > 0 ? static_cast<double>(common) / static_cast<double>(uni) : 0.0;
                rec.coverage = std::max(rec.coverage, cov);
                rec.jaccard = std::max(rec.jaccard, jac);
            }
        }
        out.push_back(rec);
    }
    return out;
}

inline std::vector<RegionRecovery> coverage_jaccard(
    const std::vector<std::vector<std::uint32_t>>& truth_hits,
    const std::vector<CorrectionRule>& mined, const Dataset& ds) {
    std::vector<std::vector<std::uint32_t>> mined_hits;
    mined_hits.reserve(mined.size());
    for (const auto& rule : mined) mined_hits.push_back(hits(rule.itemset, ds));
    return coverage_jaccard(truth_hits, mined_hits);
}

} // namespace crmine
