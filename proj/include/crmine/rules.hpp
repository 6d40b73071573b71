#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "crmine/bitset.hpp"
#include "crmine/dataset.hpp"
#include "crmine/numeric.hpp"

namespace crmine {

enum class Direction : std::uint8_t { Positive = 0, Negative = 1 };

inline const char* direction_name(Direction d) {
    return d == Direction::Positive ? "+" : "-";
}

inline Direction direction_of_delta(double delta) {
    return delta > 0.0 ? Direction::Positive : Direction::Negative;
}

// A positive correction can only fix false negatives and only break true
// negatives; symmetrically for negative corrections.
inline Partition false_partition(Direction d) {
    return d == Direction::Positive ? Partition::FalseNeg : Partition::FalsePos;
}
inline Partition true_partition(Direction d) {
    return d == Direction::Positive ? Partition::TrueNeg : Partition::TruePos;
}

inline std::int64_t n_false(const Dataset& ds, Direction d) {
    return static_cast<std::int64_t>(ds.part(false_partition(d)).size());
}

// Correction rule X -> delta. delta == 0 is the "no valid amount" sentinel
// and never a real rule.
struct CorrectionRule {
    ItemBitset itemset;
    double delta = 0.0;
    Direction direction = Direction::Positive;
    double support = 0.0;
    double confidence = 0.0;
    std::int64_t n_true_changed = 0;
    std::int64_t n_false_changed = 0;
    std::int32_t lattice_id = -1; // provenance when mined, else -1
};

inline std::vector<std::uint32_t> hits(const ItemBitset& itemset, const Dataset& ds) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (itemset.is_subset_of(ds.instances[i].items)) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

struct ChangedSets {
    std::vector<std::uint32_t> truly_changed;  // misclassified hits the rule fixes
    std::vector<std::uint32_t> falsely_changed; // correct hits the rule breaks
};

// Definitional evaluation of C^T and C^F: corrected scores are not clamped,
// only the sign feeds the predicted label.
inline ChangedSets changed_sets(const CorrectionRule& rule, const Dataset& ds) {
    if (rule.delta == 0.0)
        throw std::invalid_argument("changed_sets: rule has sentinel delta 0");
    ChangedSets out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Instance& inst = ds.instances[i];
        if (!rule.itemset.is_subset_of(inst.items)) continue;
        const bool correct_now = predicted_label(inst.score) == inst.label;
        const bool correct_after = predicted_label(inst.score + rule.delta) == inst.label;
        if (!correct_now && correct_after)
            out.truly_changed.push_back(static_cast<std::uint32_t>(i));
        else if (correct_now && !correct_after)
            out.falsely_changed.push_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

struct SupportConfidence {
    double support = 0.0;
    double confidence = 0.0;
    std::int64_t n_true_changed = 0;
    std::int64_t n_false_changed = 0;
};

inline SupportConfidence support_confidence(const CorrectionRule& rule, const Dataset& ds) {
    if (rule.delta == 0.0) return {};
    auto cs = changed_sets(rule, ds);
    SupportConfidence sc;
    sc.n_true_changed = static_cast<std::int64_t>(cs.truly_changed.size());
    sc.n_false_changed = static_cast<std::int64_t>(cs.falsely_changed.size());
    sc.support = safe_ratio(sc.n_true_changed, n_false(ds, direction_of_delta(rule.delta)));
    sc.confidence = safe_ratio(sc.n_true_changed, sc.n_true_changed + sc.n_false_changed);
    return sc;
}

// Candidate correction amounts derived from the dataset's distinct scores:
// with -1 = p_0 < p_1 < ... < p_k < p_{k+1} = 1, the candidates are
// -(p_i + p_{i+1})/2, strictly decreasing in i. Computed once per dataset.
struct DeltaCandidates {
    std::vector<double> scores; // distinct ascending, sentinels -1 and 1 included
    std::vector<double> deltas; // strictly decreasing; positives first
};

inline DeltaCandidates delta_candidates(const Dataset& ds) {
    if (ds.size() == 0)
        throw std::invalid_argument("delta_candidates: dataset is empty");
    DeltaCandidates dc;
    dc.scores.reserve(ds.size() + 2);
    dc.scores.push_back(-1.0);
    for (const auto& inst : ds.instances) {
        if (!(inst.score > -1.0 && inst.score < 1.0))
            throw DataError("delta_candidates: score outside (-1,1): " +
                            format_double17(inst.score));
        dc.scores.push_back(inst.score);
    }
    dc.scores.push_back(1.0);
    std::sort(dc.scores.begin(), dc.scores.end());
    dc.scores.erase(std::unique(dc.scores.begin(), dc.scores.end()), dc.scores.end());
    dc.deltas.reserve(dc.scores.size() - 1);
    for (std::size_t i = 0; i + 1 < dc.scores.size(); ++i)
        dc.deltas.push_back(-(dc.scores[i] + dc.scores[i + 1]) / 2.0);
    return dc;
}

struct DeltaEval {
    double delta = 0.0; // 0 means no feasible candidate
    std::int64_t n_true_changed = 0;
    std::int64_t n_false_changed = 0;
    double support = 0.0;
    double confidence = 0.0;
};

namespace detail {

// conf = ct/(ct+cf) with the 0/0 -> 0 convention. Exact integer compare.
inline int compare_confidence(std::int64_t ct_a, std::int64_t cf_a, std::int64_t ct_b,
                              std::int64_t cf_b) {
    const bool zero_a = ct_a == 0;
    const bool zero_b = ct_b == 0;
    if (zero_a || zero_b) {
        if (zero_a && zero_b) return 0;
        return zero_a ? -1 : 1;
    }
    const std::int64_t lhs = ct_a * (ct_b + cf_b);
    const std::int64_t rhs = ct_b * (ct_a + cf_a);
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

struct BestCandidate {
    bool any = false;
    std::int64_t ct = 0;
    std::int64_t cf = 0;
    double delta = 0.0;

    // Deterministic arg-max order: confidence, then support (same n_false, so
    // plain ct), then smaller |delta|.
    void offer(std::int64_t new_ct, std::int64_t new_cf, double new_delta) {
        if (!any) {
            any = true;
            ct = new_ct;
            cf = new_cf;
            delta = new_delta;
            return;
        }
        int c = compare_confidence(new_ct, new_cf, ct, cf);
        if (c == 0 && new_ct != ct) c = new_ct > ct ? 1 : -1;
        if (c == 0 && std::abs(new_delta) < std::abs(delta)) c = 1;
        if (c > 0) {
            ct = new_ct;
            cf = new_cf;
            delta = new_delta;
        }
    }
};

} // namespace detail

// Core of the delta optimization: one monotone sweep over the direction's
// candidates with two pointers into the score-sorted hit lists.
//
// For delta > 0 an instance flips to positive iff s > -delta; for delta < 0
// it flips to negative iff s <= -delta. Both hit lists must be ascending.
inline DeltaEval optimize_delta_sweep(std::span<const double> false_hit_scores,
                                      std::span<const double> true_hit_scores,
                                      const DeltaCandidates& cands, Direction dir,
                                      std::int64_t n_false_total, double theta) {
    // Direction unavailable: with no misclassified instances at all there is
    // nothing a correction could fix, so the sentinel is returned.
    if (n_false_total == 0) return {};
    detail::BestCandidate best;
    const auto nf = static_cast<std::int64_t>(false_hit_scores.size());
    const auto nt = static_cast<std::int64_t>(true_hit_scores.size());

    if (dir == Direction::Positive) {
        // Deltas are descending, so tau = -delta ascends; counts of scores
        // above tau shrink monotonically.
        std::int64_t below_f = 0, below_t = 0;
        for (double delta : cands.deltas) {
            if (delta <= 0.0) break;
            const double tau = -delta;
            while (below_f < nf && false_hit_scores[below_f] <= tau) ++below_f;
            while (below_t < nt && true_hit_scores[below_t] <= tau) ++below_t;
            const std::int64_t ct = nf - below_f;
            const std::int64_t cf = nt - below_t;
            if (!ratio_ge(ct, n_false_total, theta)) continue;
            best.offer(ct, cf, delta);
        }
    } else {
        std::size_t start = 0;
        while (start < cands.deltas.size() && cands.deltas[start] >= 0.0) ++start;
        std::int64_t upto_f = 0, upto_t = 0;
        for (std::size_t i = start; i < cands.deltas.size(); ++i) {
            const double delta = cands.deltas[i];
            const double tau = -delta; // ascends with i
            while (upto_f < nf && false_hit_scores[upto_f] <= tau) ++upto_f;
            while (upto_t < nt && true_hit_scores[upto_t] <= tau) ++upto_t;
            const std::int64_t ct = upto_f;
            const std::int64_t cf = upto_t;
            if (!ratio_ge(ct, n_false_total, theta)) continue;
            best.offer(ct, cf, delta);
        }
    }

    DeltaEval out;
    if (!best.any) return out;
    out.delta = best.delta;
    out.n_true_changed = best.ct;
    out.n_false_changed = best.cf;
    out.support = safe_ratio(best.ct, n_false_total);
    out.confidence = safe_ratio(best.ct, best.ct + best.cf);
    return out;
}

// Optimizes the correction amount for one itemset and direction against the
// dataset's candidate set. Returns the sentinel (delta 0, all stats 0) when
// no candidate meets the support threshold.
inline DeltaEval optimize_delta(const ItemBitset& itemset, Direction dir, const Dataset& ds,
                                double theta, const DeltaCandidates& cands) {
    std::vector<double> fs, ts;
    for (auto i : ds.part(false_partition(dir)))
        if (itemset.is_subset_of(ds.instances[i].items)) fs.push_back(ds.instances[i].score);
    for (auto i : ds.part(true_partition(dir)))
        if (itemset.is_subset_of(ds.instances[i].items)) ts.push_back(ds.instances[i].score);
    std::sort(fs.begin(), fs.end());
    std::sort(ts.begin(), ts.end());
    return optimize_delta_sweep(fs, ts, cands, dir, n_false(ds, dir), theta);
}

inline DeltaEval optimize_delta(const ItemBitset& itemset, Direction dir, const Dataset& ds,
                                double theta) {
    return optimize_delta(itemset, dir, ds, theta, delta_candidates(ds));
}

} // namespace crmine
