#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "crmine/dataset.hpp"
#include "crmine/discretize.hpp"
#include "crmine/items.hpp"
#include "crmine/rng.hpp"
#include "crmine/rules.hpp"
#include "crmine/table.hpp"

namespace crmine {

// ---------------------------------------------------------------------------
// Split machinery

struct SplitSpec {
    std::size_t trn_count = 100;
    std::size_t mng_count = 500;
    double aug_fraction_of_rest = 0.5; // AUG takes this share of what remains, TST the rest
};

struct LackSplits {
    std::vector<std::uint32_t> trn, mng, aug, tst;
};

namespace detail {

// Class-wise stratified draw: per-class quotas by largest remainder, so each
// split's class ratio stays within one instance of the population ratio.
// Pools are consumed in place.
inline std::vector<std::uint32_t> draw_stratified(std::vector<std::vector<std::uint32_t>>& pools,
                                                  std::size_t want) {
    std::size_t remaining = 0;
    for (const auto& p : pools) remaining += p.size();
    want = std::min(want, remaining);

    std::vector<std::size_t> quota(pools.size(), 0);
    std::vector<std::pair<double, std::size_t>> frac;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < pools.size(); ++c) {
        const double exact = remaining == 0
                                 ? 0.0
                                 : static_cast<double>(want) * static_cast<double>(pools[c].size()) /
                                       static_cast<double>(remaining);
        quota[c] = std::min(pools[c].size(), static_cast<std::size_t>(exact));
        assigned += quota[c];
        frac.emplace_back(exact - static_cast<double>(quota[c]), c);
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (const auto& [f, c] : frac) {
        if (assigned >= want) break;
        if (quota[c] < pools[c].size()) {
            ++quota[c];
            ++assigned;
        }
    }

    std::vector<std::uint32_t> out;
    out.reserve(want);
    for (std::size_t c = 0; c < pools.size(); ++c) {
        for (std::size_t i = 0; i < quota[c]; ++i) {
            out.push_back(pools[c].back());
            pools[c].pop_back();
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::vector<std::uint32_t>> class_pools(const Dataset& ds,
                                                           const std::vector<std::uint32_t>& population,
                                                           Rng& rng) {
    std::vector<std::vector<std::uint32_t>> pools(2);
    for (auto i : population) pools[ds.instances[i].label == 1 ? 1 : 0].push_back(i);
    rng.shuffle(pools[0]);
    rng.shuffle(pools[1]);
    return pools;
}

} // namespace detail

// TRN/MNG/AUG/TST for the data-lacking setting; all splits class-stratified
// and disjoint; AUG takes half of what TRN and MNG leave, TST the rest.
inline LackSplits gen_lack_splits(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (n < spec.trn_count + spec.mng_count + 2)
        throw DataError("gen_lack_splits: dataset too small (" + std::to_string(n) + " instances)");
    Rng rng(seed);
    std::vector<std::uint32_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<std::uint32_t>(i);
    auto pools = detail::class_pools(ds, all, rng);

    LackSplits out;
    out.trn = detail::draw_stratified(pools, spec.trn_count);
    out.mng = detail::draw_stratified(pools, spec.mng_count);
    const std::size_t rest = n - out.trn.size() - out.mng.size();
    out.aug = detail::draw_stratified(
        pools, static_cast<std::size_t>(spec.aug_fraction_of_rest * static_cast<double>(rest)));
    out.tst = detail::draw_stratified(pools, rest);
    return out;
}

// ---------------------------------------------------------------------------
// Concept-drift scenario generation

// One condition of a region descriptor: the instance must (or must not)
// carry the item. Negative numeric conditions are itemset-expressible via
// the complementary cut item; negative categorical ones are not, but the
// hit set is what downstream consumers use.
struct RegionCondition {
    std::uint32_t item_id = 0;
    bool present = true;
};

struct DriftRegion {
    std::vector<RegionCondition> conditions;
    std::vector<std::uint32_t> hit_instances; // over the full dataset, ascending
    int shifted_label = 1;                    // label suppressed in TRN
};

struct DriftScenario {
    std::vector<DriftRegion> regions;
    std::vector<std::uint32_t> trn, mng, tst;
    std::uint64_t seed = 0;
};

struct DriftConfig {
    std::size_t n_regions = 10;
    double min_frac = 0.03;
    double max_frac = 0.05;
    double min_class_frac = 0.10;
    int tree_depth = 5;
    double trn_frac = 0.4;
    double mng_frac = 0.4;
    double shifted_trn_weight = 0.05; // inclusion weight for shifted instances in TRN
    int max_attempts = 1000;
};

namespace detail {

struct TreeLeaf {
    std::vector<RegionCondition> conditions;
    std::vector<std::uint32_t> members;
};

// Random axis-aligned partition of the instances: at every node pick a
// uniform attribute, then a uniform cut (numeric) or category, and split on
// the corresponding item bit.
inline void random_tree_split(const Dataset& ds, const ItemVocabulary& vocab,
                              const std::vector<std::vector<std::uint32_t>>& attr_items, Rng& rng,
                              std::vector<std::uint32_t> members,
                              std::vector<RegionCondition> conditions, int depth,
                              std::vector<TreeLeaf>& leaves) {
    if (depth == 0 || members.empty()) {
        leaves.push_back({std::move(conditions), std::move(members)});
        return;
    }
    const auto& items = attr_items[rng.index(attr_items.size())];
    // For numeric attributes only the ">= c" items act as split predicates;
    // its complement is the "< c" item. Categorical attributes split on "=".
    std::vector<std::uint32_t> splitters;
    for (auto id : items)
        if (vocab.items[id].op == ItemOp::GreaterEq || vocab.items[id].op == ItemOp::Eq)
            splitters.push_back(id);
    if (splitters.empty()) {
        leaves.push_back({std::move(conditions), std::move(members)});
        return;
    }
    const std::uint32_t item = splitters[rng.index(splitters.size())];

    std::vector<std::uint32_t> with, without;
    for (auto i : members)
        (ds.instances[i].items.test(item) ? with : without).push_back(i);

    auto cond_with = conditions;
    cond_with.push_back({item, true});
    auto cond_without = std::move(conditions);
    cond_without.push_back({item, false});
    random_tree_split(ds, vocab, attr_items, rng, std::move(with), std::move(cond_with), depth - 1,
                      leaves);
    random_tree_split(ds, vocab, attr_items, rng, std::move(without), std::move(cond_without),
                      depth - 1, leaves);
}

} // namespace detail

// Repeatedly partitions the dataset with a random depth-limited tree until
// n_regions disjoint leaves satisfy the size window and the pre-shift class
// balance, then assigns a random label per region, biases it out of TRN via
// weighted sampling, and draws MNG/TST stratified from the remainder.
inline DriftScenario gen_drift_scenario(const Dataset& ds, const ItemVocabulary& vocab,
                                        std::uint64_t seed, const DriftConfig& cfg = {}) {
    const std::size_t n = ds.size();
    if (n == 0) throw DataError("gen_drift_scenario: empty dataset");

    std::vector<std::vector<std::uint32_t>> attr_items;
    {
        std::string cur;
        for (const auto& it : vocab.items) {
            if (attr_items.empty() || it.attribute != cur) {
                attr_items.emplace_back();
                cur = it.attribute;
            }
            attr_items.back().push_back(it.id);
        }
    }
    if (attr_items.empty()) throw DataError("gen_drift_scenario: vocabulary has no items");

    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        Rng rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(attempt) + 1);

        std::vector<std::uint32_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<std::uint32_t>(i);
        std::vector<detail::TreeLeaf> leaves;
        detail::random_tree_split(ds, vocab, attr_items, rng, all, {}, cfg.tree_depth, leaves);

        std::vector<std::size_t> eligible;
        for (std::size_t li = 0; li < leaves.size(); ++li) {
            const auto& leaf = leaves[li];
            const auto sz = static_cast<double>(leaf.members.size());
            if (sz < cfg.min_frac * static_cast<double>(n) ||
                sz > cfg.max_frac * static_cast<double>(n))
                continue;
            std::size_t pos = 0;
            for (auto i : leaf.members) pos += ds.instances[i].label == 1;
            const auto neg = leaf.members.size() - pos;
            if (static_cast<double>(pos) < cfg.min_class_frac * sz ||
                static_cast<double>(neg) < cfg.min_class_frac * sz)
                continue;
            eligible.push_back(li);
        }
        if (eligible.size() < cfg.n_regions) continue;

        rng.shuffle(eligible);
        eligible.resize(cfg.n_regions);
        std::sort(eligible.begin(), eligible.end());

        DriftScenario sc;
        sc.seed = seed;
        std::vector<int> region_of(n, -1);
        for (auto li : eligible) {
            DriftRegion region;
            region.conditions = leaves[li].conditions;
            region.hit_instances = leaves[li].members;
            std::sort(region.hit_instances.begin(), region.hit_instances.end());
            region.shifted_label = rng.bernoulli(0.5) ? 1 : -1;
            for (auto i : region.hit_instances) region_of[i] = static_cast<int>(sc.regions.size());
            sc.regions.push_back(std::move(region));
        }

        // TRN by weighted sampling without replacement (Efraimidis-Spirakis
        // keys u^(1/w)); shifted instances carry the low weight.
        const auto trn_count = static_cast<std::size_t>(
            std::llround(cfg.trn_frac * static_cast<double>(n)));
        std::vector<std::pair<double, std::uint32_t>> keys;
        keys.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            const int r = region_of[i];
            const bool shifted = r >= 0 && ds.instances[i].label == sc.regions[static_cast<std::size_t>(r)].shifted_label;
            const double w = shifted ? cfg.shifted_trn_weight : 1.0;
            double u = rng.uniform();
            if (u <= 0.0) u = 0x1.0p-53;
            keys.emplace_back(std::pow(u, 1.0 / w), i);
        }
        std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        sc.trn.reserve(trn_count);
        for (std::size_t i = 0; i < trn_count && i < keys.size(); ++i) sc.trn.push_back(keys[i].second);
        std::sort(sc.trn.begin(), sc.trn.end());

        std::vector<char> in_trn(n, 0);
        for (auto i : sc.trn) in_trn[i] = 1;
        std::vector<std::uint32_t> rest;
        for (std::uint32_t i = 0; i < n; ++i)
            if (!in_trn[i]) rest.push_back(i);
        auto pools = detail::class_pools(ds, rest, rng);
        const auto mng_count = static_cast<std::size_t>(
            std::llround(cfg.mng_frac * static_cast<double>(n)));
        sc.mng = detail::draw_stratified(pools, mng_count);
        sc.tst = detail::draw_stratified(pools, rest.size());
        return sc;
    }
    throw DataError("gen_drift_scenario: no qualifying region set after " +
                    std::to_string(cfg.max_attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Synthetic tables and simulated base-model scores

// All-numeric random table with placeholder scores; pair with
// simulate_drift_scores after scenario generation.
inline RawTable synth_numeric_table(std::size_t n_rows, std::size_t n_attrs, std::uint64_t seed,
                                    double positive_rate = 0.5) {
    Rng rng(seed);
    RawTable t;
    for (std::size_t a = 0; a < n_attrs; ++a) t.attribute_names.push_back("x" + std::to_string(a));
    t.cells.reserve(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::vector<std::string> row;
        row.reserve(n_attrs);
        for (std::size_t a = 0; a < n_attrs; ++a)
            row.push_back(format_double17(std::floor(rng.uniform(0.0, 100.0) * 100.0) / 100.0));
        t.cells.push_back(std::move(row));
        const int label = rng.bernoulli(positive_rate) ? 1 : -1;
        t.labels.push_back(label);
        t.scores.push_back(label * 0.5);
    }
    return t;
}

struct ScoreSimConfig {
    double strong_lo = 0.45, strong_hi = 0.95; // correct-score magnitude
    double weak_lo = 0.05, weak_hi = 0.35;     // misclassified-score magnitude
    double background_error = 0.02;            // error rate outside regions, off-TRN
    std::size_t n_persistent = 2;              // regions wrong on TRN and off-TRN alike
    double persistent_error = 0.5;
};

// Emulates a model trained on TRN: TRN instances score correctly
// (memorized); outside TRN, instances of the shifted label inside a drift
// region are misclassified with a weak score; a few persistent-error leaves
// are misclassified everywhere so the drift filter has something to reject.
inline void simulate_drift_scores(Dataset& ds, const DriftScenario& sc, std::uint64_t seed,
                                  const ScoreSimConfig& cfg = {}) {
    const std::size_t n = ds.size();
    Rng rng(seed ^ 0xd1b54a32d192ed03ull);

    std::vector<char> in_trn(n, 0);
    for (auto i : sc.trn) in_trn[i] = 1;
    std::vector<int> region_of(n, -1);
    for (std::size_t r = 0; r < sc.regions.size(); ++r)
        for (auto i : sc.regions[r].hit_instances) region_of[i] = static_cast<int>(r);

    // Persistent weak spots: a few instance blocks drawn from what the
    // regions left over.
    std::vector<char> persistent(n, 0);
    if (cfg.n_persistent > 0) {
        std::vector<std::uint32_t> free_idx;
        for (std::uint32_t i = 0; i < n; ++i)
            if (region_of[i] < 0) free_idx.push_back(i);
        rng.shuffle(free_idx);
        const std::size_t block = std::min(free_idx.size(), n / 25);
        for (std::size_t b = 0; b < cfg.n_persistent; ++b)
            for (std::size_t i = b * block / cfg.n_persistent; i < (b + 1) * block / cfg.n_persistent;
                 ++i)
                persistent[free_idx[i]] = 1;
    }

    for (std::size_t i = 0; i < n; ++i) {
        auto& inst = ds.instances[i];
        const double strong = rng.uniform(cfg.strong_lo, cfg.strong_hi);
        const double weak = rng.uniform(cfg.weak_lo, cfg.weak_hi);
        const double roll = rng.uniform();

        bool wrong = false;
        if (persistent[i]) {
            wrong = roll < cfg.persistent_error; // same on and off TRN
        } else if (!in_trn[i]) {
            const int r = region_of[i];
            if (r >= 0 && inst.label == sc.regions[static_cast<std::size_t>(r)].shifted_label)
                wrong = true;
            else
                wrong = roll < cfg.background_error;
        }
        inst.score = wrong ? -inst.label * weak : inst.label * strong;
    }
    ds.rebuild_partitions();
}

// ---------------------------------------------------------------------------
// Rule-guided sampling for data collection

// Picks n_rules rules at random, samples per_rule of each rule's AUG hits
// without replacement, and tops the union up to `total` with uniform draws.
inline std::vector<std::uint32_t> rule_guided_sample(const std::vector<CorrectionRule>& rules,
                                                     const Dataset& aug, std::size_t n_rules,
                                                     std::size_t per_rule, std::size_t total,
                                                     std::uint64_t seed) {
    if (aug.size() == 0) throw DataError("rule_guided_sample: empty augmentation dataset");
    Rng rng(seed);

    std::vector<std::uint32_t> rule_order(rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) rule_order[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(rule_order);
    rule_order.resize(std::min(n_rules, rule_order.size()));

    std::vector<char> picked(aug.size(), 0);
    std::size_t n_picked = 0;
    for (auto ri : rule_order) {
        auto h = hits(rules[ri].itemset, aug);
        rng.shuffle(h);
        const std::size_t take = std::min(per_rule, h.size());
        for (std::size_t i = 0; i < take; ++i) {
            if (!picked[h[i]]) {
                picked[h[i]] = 1;
                ++n_picked;
            }
        }
    }

    std::vector<std::uint32_t> pool;
    for (std::uint32_t i = 0; i < aug.size(); ++i)
        if (!picked[i]) pool.push_back(i);
    rng.shuffle(pool);
    for (std::size_t i = 0; n_picked < total && i < pool.size(); ++i) {
        picked[pool[i]] = 1;
        ++n_picked;
    }

    std::vector<std::uint32_t> out;
    out.reserve(n_picked);
    for (std::uint32_t i = 0; i < aug.size(); ++i)
        if (picked[i]) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------------------
// Planted-rule fixtures

struct PlantedDataset {
    Dataset data;
    ItemVocabulary vocab;
    ItemBitset planted;
    std::vector<std::uint32_t> truth_hits;
};

// Synthetic dataset with one known inaccurate subpopulation: instances hit
// by the planted itemset get a wrong-sign weak score with probability
// flip_rate; everything else scores correctly, magnitude jittered by noise
// but the sign preserved.
inline PlantedDataset plant_rule_dataset(std::size_t n_items, std::size_t n_instances,
                                         const std::vector<std::uint32_t>& planted_items,
                                         double flip_rate, double noise, std::uint64_t seed) {
    if (!(flip_rate > 0.0 && flip_rate <= 1.0))
        throw DataError("plant_rule_dataset: flip_rate must be in (0,1]");
    Rng rng(seed);

    PlantedDataset out;
    for (std::uint32_t i = 0; i < n_items; ++i)
        out.vocab.items.push_back({i, "f" + std::to_string(i), ItemOp::Eq, std::string("1")});
    out.vocab.reset_order();
    out.planted = ItemBitset::from_ids(n_items, planted_items);

    out.data.instances.reserve(n_instances);
    for (std::size_t r = 0; r < n_instances; ++r) {
        Instance inst;
        inst.items = ItemBitset(n_items);
        for (std::size_t i = 0; i < n_items; ++i)
            if (rng.bernoulli(0.5)) inst.items.set(i);
        inst.label = rng.bernoulli(0.5) ? 1 : -1;

        const bool hit = out.planted.is_subset_of(inst.items);
        const bool flip = hit && rng.bernoulli(flip_rate);
        if (flip) {
            inst.score = -inst.label * rng.uniform(0.08, 0.35);
        } else {
            double mag = 0.7 + noise * rng.normal();
            mag = std::min(0.95, std::max(0.45, mag));
            inst.score = inst.label * mag;
        }
        if (hit) out.truth_hits.push_back(static_cast<std::uint32_t>(r));
        out.data.instances.push_back(std::move(inst));
    }
    if (out.truth_hits.empty())
        throw DataError("plant_rule_dataset: planted itemset hits no instances");
    out.data.rebuild_partitions();
    return out;
}

} // namespace crmine
