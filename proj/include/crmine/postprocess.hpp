#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <limits>
#include <vector>

#include "crmine/dataset.hpp"
#include "crmine/rng.hpp"
#include "crmine/rules.hpp"

namespace crmine {

// Re-scores each rule (delta kept fixed) on the validation dataset and keeps
// it only when the confidence there reaches lambda_valid.
inline std::vector<CorrectionRule> denoise(const std::vector<CorrectionRule>& rules,
                                           const Dataset& validation, double lambda_valid) {
    std::vector<CorrectionRule> out;
    for (const auto& rule : rules) {
        if (n_false(validation, rule.direction) == 0)
            std::cerr << "warning: validation data has no misclassified instances for direction "
                      << direction_name(rule.direction) << "\n";
        auto sc = support_confidence(rule, validation);
        if (ratio_ge(sc.n_true_changed, sc.n_true_changed + sc.n_false_changed, lambda_valid))
            out.push_back(rule);
    }
    return out;
}

// Concept-drift screen: a rule mined on new data is kept only when it does
// NOT work on the old training data, i.e. its confidence there is strictly
// below lambda_drift.
inline std::vector<CorrectionRule> drift_filter(const std::vector<CorrectionRule>& rules,
                                                const Dataset& old_data, double lambda_drift) {
    std::vector<CorrectionRule> out;
    for (const auto& rule : rules) {
        auto sc = support_confidence(rule, old_data);
        if (!ratio_ge(sc.n_true_changed, sc.n_true_changed + sc.n_false_changed, lambda_drift))
            out.push_back(rule);
    }
    return out;
}

struct ClusterConfig {
    std::size_t k = 50;         // clusters per direction
    std::size_t max_iters = 100;
    std::uint64_t seed = 0;
};

// One rule's binary hit profile over a reference instance list.
struct HitVector {
    std::size_t rule_id = 0;
    std::vector<char> bits;
};

inline std::size_t hamming(const std::vector<char>& a, const std::vector<char>& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

struct KModesResult {
    std::vector<std::size_t> representatives; // indices into the input vectors
    std::vector<std::size_t> assignment;
    std::vector<double> objective_per_iter; // sum of Hamming distances
};

namespace detail {

// k-modes with Hamming distance. Init: seeded random first centroid, then
// greedy farthest-point. Centroid update is the coordinate-wise mode with
// exact .5 ties resolved to 1; empty clusters keep their previous centroid.
inline KModesResult kmodes_run(const std::vector<HitVector>& vectors, const ClusterConfig& cfg) {
    KModesResult res;
    const std::size_t n = vectors.size();
    if (n == 0) return res;
    const std::size_t k = std::min(cfg.k, n);
    const std::size_t dim = vectors[0].bits.size();

    Rng rng(cfg.seed);
    std::vector<std::vector<char>> centroids;
    centroids.reserve(k);
    centroids.push_back(vectors[rng.index(n)].bits);
    std::vector<std::size_t> min_dist(n);
    for (std::size_t i = 0; i < n; ++i) min_dist[i] = hamming(vectors[i].bits, centroids[0]);
    while (centroids.size() < k) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (min_dist[i] > min_dist[far]) far = i;
        centroids.push_back(vectors[far].bits);
        for (std::size_t i = 0; i < n; ++i)
            min_dist[i] = std::min(min_dist[i], hamming(vectors[i].bits, centroids.back()));
    }

    res.assignment.assign(n, 0);
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        bool changed = iter == 0;
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            std::size_t best_d = std::numeric_limits<std::size_t>::max();
            for (std::size_t c = 0; c < centroids.size(); ++c) {
                const std::size_t d = hamming(vectors[i].bits, centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            objective += static_cast<double>(best_d);
            if (res.assignment[i] != best) {
                res.assignment[i] = best;
                changed = true;
            }
        }
        res.objective_per_iter.push_back(objective);
        if (!changed) break;

        for (std::size_t c = 0; c < centroids.size(); ++c) {
            std::vector<std::size_t> ones(dim, 0);
            std::size_t members = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (res.assignment[i] != c) continue;
                ++members;
                for (std::size_t d = 0; d < dim; ++d) ones[d] += vectors[i].bits[d];
            }
            if (members == 0) continue;
            for (std::size_t d = 0; d < dim; ++d)
                centroids[c][d] = 2 * ones[d] >= members ? 1 : 0;
        }
    }

    // Nearest rule per centroid, ties to the lowest rule id; duplicates
    // collapse, so "up to k" representatives.
    std::vector<char> taken(n, 0);
    for (const auto& centroid : centroids) {
        std::size_t best = 0;
        std::size_t best_d = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t d = hamming(vectors[i].bits, centroid);
            if (d < best_d || (d == best_d && vectors[i].rule_id < vectors[best].rule_id)) {
                best_d = d;
                best = i;
            }
        }
        if (!taken[best]) {
            taken[best] = 1;
            res.representatives.push_back(best);
        }
    }
    std::sort(res.representatives.begin(), res.representatives.end());
    return res;
}

} // namespace detail

// Direction-wise k-modes summarization: clusters the rules' hit vectors over
// the reference dataset and returns the nearest rule to each centroid, up to
// k per direction. Fewer rules than k means every rule represents itself.
inline std::vector<CorrectionRule> kmodes_summarize(const std::vector<CorrectionRule>& rules,
                                                    const Dataset& reference,
                                                    const ClusterConfig& cfg) {
    std::vector<char> selected(rules.size(), 0);
    for (int d = 0; d < 2; ++d) {
        const Direction dir = d == 0 ? Direction::Positive : Direction::Negative;
        std::vector<HitVector> vectors;
        for (std::size_t ri = 0; ri < rules.size(); ++ri) {
            if (rules[ri].direction != dir) continue;
            HitVector hv;
            hv.rule_id = ri;
            hv.bits.assign(reference.size(), 0);
            for (std::size_t i = 0; i < reference.size(); ++i)
                hv.bits[i] = rules[ri].itemset.is_subset_of(reference.instances[i].items) ? 1 : 0;
            vectors.push_back(std::move(hv));
        }
        if (vectors.empty()) continue;
        if (vectors.size() <= cfg.k) {
            for (const auto& hv : vectors) selected[hv.rule_id] = 1;
            continue;
        }
        ClusterConfig dir_cfg = cfg;
        dir_cfg.seed = cfg.seed + static_cast<std::uint64_t>(d);
        auto res = detail::kmodes_run(vectors, dir_cfg);
        for (auto idx : res.representatives) selected[vectors[idx].rule_id] = 1;
    }

    std::vector<CorrectionRule> out;
    for (std::size_t ri = 0; ri < rules.size(); ++ri)
        if (selected[ri]) out.push_back(rules[ri]);
    return out;
}

} // namespace crmine
