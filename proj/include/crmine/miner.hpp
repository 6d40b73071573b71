#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <iostream>
#include <thread>
#include <unordered_map>
#include <vector>

#include "crmine/dataset.hpp"
#include "crmine/rules.hpp"

namespace crmine {

struct MinerConfig {
    int max_len = 5;     // K
    double theta = 0.05; // support threshold
    double lambda = 0.9; // confidence threshold
    bool minimal = false;
    bool pruning = true;
    bool use_positive = true;
    bool use_negative = true;
    int workers = 1;
};

// Family of itemsets {Y : core <= Y <= core u tail} all hitting exactly the
// same false instances. core and tail are ascending and disjoint;
// false_hits is the shared occurrence set (ascending transaction indices).
struct EquivalentLattice {
    std::vector<std::uint32_t> core;
    std::vector<std::uint32_t> tail;
    std::vector<std::uint32_t> false_hits;
};

struct MiningCounters {
    std::uint64_t lattices_enumerated = 0;
    std::uint64_t lattices_pruned = 0;
    std::uint64_t itemsets_scanned = 0;

    MiningCounters& operator+=(const MiningCounters& o) {
        lattices_enumerated += o.lattices_enumerated;
        lattices_pruned += o.lattices_pruned;
        itemsets_scanned += o.itemsets_scanned;
        return *this;
    }
};

struct MinedRuleSet {
    std::vector<CorrectionRule> rules;
    MiningCounters counters;
    std::vector<std::string> diagnostics;
};

// Items ordered by ascending occurrence count in the false dataset, ties by
// original id. Returns perm with perm[original_id] = mining_id.
inline std::vector<std::uint32_t> reorder_items(const std::vector<ItemBitset>& false_transactions,
                                                std::size_t n_items) {
    std::vector<std::uint64_t> count(n_items, 0);
    for (const auto& t : false_transactions)
        for (auto id : t.to_ids()) ++count[id];
    std::vector<std::uint32_t> order(n_items);
    for (std::size_t i = 0; i < n_items; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::stable_sort(order.begin(), order.end(), [&count](std::uint32_t a, std::uint32_t b) {
        return count[a] != count[b] ? count[a] < count[b] : a < b;
    });
    std::vector<std::uint32_t> perm(n_items);
    for (std::size_t pos = 0; pos < n_items; ++pos) perm[order[pos]] = static_cast<std::uint32_t>(pos);
    return perm;
}

namespace detail {

// Depth-first prefix extension with occurrence deliver. At each node the
// tail accumulates every item above the extension index present in all
// current occurrences; tail items never branch, which keeps the emitted
// lattices pairwise disjoint while their union covers the frequent itemsets.
class LatticeEnumerator {
public:
    LatticeEnumerator(const std::vector<ItemBitset>& txns, std::size_t n_items, double theta,
                      int max_len)
        : txns_(txns),
          n_items_(n_items),
          theta_(theta),
          max_len_(max_len),
          n_total_(static_cast<std::int64_t>(txns.size())),
          in_tail_(n_items, 0) {}

    std::vector<EquivalentLattice> run() {
        std::vector<std::uint32_t> root(txns_.size());
        for (std::size_t i = 0; i < root.size(); ++i) root[i] = static_cast<std::uint32_t>(i);
        scratch_.resize(static_cast<std::size_t>(max_len_) + 1);
        for (auto& s : scratch_) s.resize(n_items_);
        node(root, -1, 0);
        return std::move(result_);
    }

private:
    void node(const std::vector<std::uint32_t>& occ, int last_item, int depth) {
        auto& cond = scratch_[static_cast<std::size_t>(depth)];
        for (auto t : occ)
            for (auto id : txns_[t].to_ids())
                if (static_cast<int>(id) > last_item) cond[id].push_back(t);

        const std::size_t tail_mark = tail_.size();
        std::vector<std::uint32_t> branches;
        for (std::uint32_t j = static_cast<std::uint32_t>(last_item + 1); j < n_items_; ++j) {
            if (in_tail_[j]) continue;
            if (cond[j].size() == occ.size()) {
                tail_.push_back(j);
                in_tail_[j] = 1;
            } else if (ratio_ge(static_cast<std::int64_t>(cond[j].size()), n_total_, theta_)) {
                branches.push_back(j);
            }
        }

        EquivalentLattice lat;
        lat.core = core_;
        lat.tail = tail_;
        std::sort(lat.tail.begin(), lat.tail.end());
        lat.false_hits = occ;
        result_.push_back(std::move(lat));

        if (static_cast<int>(core_.size()) < max_len_) {
            for (auto j : branches) {
                core_.push_back(j);
                node(cond[j], static_cast<int>(j), depth + 1);
                core_.pop_back();
            }
        }

        for (std::uint32_t j = static_cast<std::uint32_t>(last_item + 1); j < n_items_; ++j)
            cond[j].clear();
        for (std::size_t i = tail_mark; i < tail_.size(); ++i) in_tail_[tail_[i]] = 0;
        tail_.resize(tail_mark);
    }

    const std::vector<ItemBitset>& txns_;
    std::size_t n_items_;
    double theta_;
    int max_len_;
    std::int64_t n_total_;
    std::vector<std::uint32_t> core_, tail_;
    std::vector<char> in_tail_;
    std::vector<std::vector<std::vector<std::uint32_t>>> scratch_;
    std::vector<EquivalentLattice> result_;
};

} // namespace detail

// Enumerates equivalent lattices over the given transactions with frequency
// threshold |D(X)|/|D| >= theta. Only lattices whose core fits the length
// limit are produced; every member of a larger-core lattice would exceed it.
inline std::vector<EquivalentLattice> enumerate_lattices(const std::vector<ItemBitset>& transactions,
                                                         std::size_t n_items, double theta,
                                                         int max_len) {
    detail::LatticeEnumerator e(transactions, n_items, theta, max_len);
    return e.run();
}

// All itemsets represented by a lattice, ascending by size then lex order.
// The empty set is omitted: itemsets are non-empty by definition.
inline std::vector<std::vector<std::uint32_t>> lattice_members(const EquivalentLattice& lat,
                                                               int max_len = -1) {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur(lat.core);
    auto emit = [&out, max_len](const std::vector<std::uint32_t>& items) {
        if (items.empty()) return;
        if (max_len >= 0 && items.size() > static_cast<std::size_t>(max_len)) return;
        auto sorted = items;
        std::sort(sorted.begin(), sorted.end());
        out.push_back(std::move(sorted));
    };
    // Subsets of the tail via binary counter; tails are small in tests where
    // this helper is used.
    const std::size_t m = lat.tail.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        cur.resize(lat.core.size());
        for (std::size_t b = 0; b < m; ++b)
            if (mask & (std::uint64_t{1} << b)) cur.push_back(lat.tail[b]);
        emit(cur);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline std::vector<std::uint32_t> intersect_sorted(const std::vector<std::uint32_t>& a,
                                                   const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    out.reserve(std::min(a.size(), b.size()));
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            out.push_back(a[i]);
            ++i;
            ++j;
        }
    }
    return out;
}

// Per-direction mining state. False and true instances are kept in score
// order so occurrence lists double as sorted score lists for the sweep.
class DirectionMiner {
public:
    DirectionMiner(const Dataset& ds, Direction dir, const MinerConfig& cfg,
                   const DeltaCandidates& cands)
        : dir_(dir), cfg_(cfg), cands_(cands) {
        n_items_ = ds.instances.empty() ? 0 : ds.instances[0].items.size();

        auto by_score = [&ds](std::vector<std::uint32_t> idx) {
            std::stable_sort(idx.begin(), idx.end(), [&ds](std::uint32_t a, std::uint32_t b) {
                return ds.instances[a].score < ds.instances[b].score;
            });
            return idx;
        };
        auto f_idx = by_score(ds.part(false_partition(dir)));
        auto t_idx = by_score(ds.part(true_partition(dir)));
        nf_total_ = static_cast<std::int64_t>(f_idx.size());

        std::vector<ItemBitset> f_orig;
        f_orig.reserve(f_idx.size());
        fscore_.reserve(f_idx.size());
        for (auto i : f_idx) {
            f_orig.push_back(ds.instances[i].items);
            fscore_.push_back(ds.instances[i].score);
        }
        perm_ = reorder_items(f_orig, n_items_);
        inv_perm_.resize(n_items_);
        for (std::uint32_t orig = 0; orig < n_items_; ++orig) inv_perm_[perm_[orig]] = orig;

        f_txn_.reserve(f_orig.size());
        for (const auto& t : f_orig) f_txn_.push_back(t.remapped(perm_));

        tscore_.reserve(t_idx.size());
        t_occ_list_.assign(n_items_, {});
        all_true_.reserve(t_idx.size());
        for (std::uint32_t r = 0; r < t_idx.size(); ++r) {
            const auto& inst = ds.instances[t_idx[r]];
            tscore_.push_back(inst.score);
            all_true_.push_back(r);
            for (auto id : inst.items.to_ids()) t_occ_list_[perm_[id]].push_back(r);
        }
    }

    std::vector<EquivalentLattice> enumerate() const {
        return enumerate_lattices(f_txn_, n_items_, cfg_.theta, cfg_.max_len);
    }

    struct ScanResult {
        std::vector<CorrectionRule> rules;
        bool pruned = false;
        std::uint64_t itemsets_scanned = 0;
    };

    ScanResult scan(const EquivalentLattice& lat, std::int32_t lattice_id) const {
        ScanResult res;
        std::vector<double> f_hit_scores;
        f_hit_scores.reserve(lat.false_hits.size());
        for (auto r : lat.false_hits) f_hit_scores.push_back(fscore_[r]);

        std::vector<std::uint32_t> occ_core = all_true_;
        for (auto j : lat.core) occ_core = intersect_sorted(occ_core, t_occ_list_[j]);

        if (cfg_.pruning) {
            auto occ_top = occ_core;
            for (auto j : lat.tail) occ_top = intersect_sorted(occ_top, t_occ_list_[j]);
            auto top = evaluate(f_hit_scores, occ_top);
            if (!ratio_ge(top.n_true_changed, top.n_true_changed + top.n_false_changed,
                          cfg_.lambda)) {
                res.pruned = true;
                return res;
            }
        }

        std::vector<std::uint32_t> itemset(lat.core);
        scan_node(lat, f_hit_scores, occ_core, itemset, 0, lattice_id, res);
        return res;
    }

    // Maps a mining-order itemset back to original vocabulary ids.
    ItemBitset to_original(const std::vector<std::uint32_t>& mining_ids) const {
        ItemBitset b(n_items_);
        for (auto j : mining_ids) b.set(inv_perm_[j]);
        return b;
    }

    std::int64_t n_false_total() const { return nf_total_; }

private:
    DeltaEval evaluate(const std::vector<double>& f_hit_scores,
                       const std::vector<std::uint32_t>& occ_true) const {
        std::vector<double> t_hit_scores;
        t_hit_scores.reserve(occ_true.size());
        for (auto r : occ_true) t_hit_scores.push_back(tscore_[r]);
        return optimize_delta_sweep(f_hit_scores, t_hit_scores, cands_, dir_, nf_total_,
                                    cfg_.theta);
    }

    // Evaluate the current member, record it when acceptable, backtrack
    // immediately in minimal mode (descendants would not be minimal), stop
    // descending at length K.
    void scan_node(const EquivalentLattice& lat, const std::vector<double>& f_hit_scores,
                   const std::vector<std::uint32_t>& occ_true, std::vector<std::uint32_t>& itemset,
                   std::size_t tail_from, std::int32_t lattice_id, ScanResult& res) const {
        if (!itemset.empty()) {
            ++res.itemsets_scanned;
            auto eval = evaluate(f_hit_scores, occ_true);
            if (eval.delta != 0.0 &&
                ratio_ge(eval.n_true_changed, eval.n_true_changed + eval.n_false_changed,
                         cfg_.lambda)) {
                CorrectionRule rule;
                rule.itemset = to_original(itemset);
                rule.delta = eval.delta;
                rule.direction = dir_;
                rule.support = eval.support;
                rule.confidence = eval.confidence;
                rule.n_true_changed = eval.n_true_changed;
                rule.n_false_changed = eval.n_false_changed;
                rule.lattice_id = lattice_id;
                res.rules.push_back(std::move(rule));
                if (cfg_.minimal) return;
            }
        }
        if (static_cast<int>(itemset.size()) >= cfg_.max_len) return;
        for (std::size_t ti = tail_from; ti < lat.tail.size(); ++ti) {
            const auto j = lat.tail[ti];
            auto occ_child = intersect_sorted(occ_true, t_occ_list_[j]);
            itemset.push_back(j);
            scan_node(lat, f_hit_scores, occ_child, itemset, ti + 1, lattice_id, res);
            itemset.pop_back();
        }
    }

    Direction dir_;
    MinerConfig cfg_;
    const DeltaCandidates& cands_;
    std::size_t n_items_ = 0;
    std::int64_t nf_total_ = 0;
    std::vector<std::uint32_t> perm_, inv_perm_;
    std::vector<ItemBitset> f_txn_;
    std::vector<double> fscore_, tscore_;
    std::vector<std::vector<std::uint32_t>> t_occ_list_;
    std::vector<std::uint32_t> all_true_;
};

} // namespace detail

// Keeps only rules with no strict-subset rule sharing the same false-hit set
// and direction. Groups are resolved by exact hit-set comparison; the hash
// only buckets them.
inline std::vector<CorrectionRule> minimal_filter(const std::vector<CorrectionRule>& rules,
                                                  const Dataset& ds) {
    struct Group {
        std::vector<std::uint32_t> key;
        std::vector<std::size_t> members;
    };
    std::unordered_map<std::uint64_t, std::vector<Group>> groups;
    std::vector<std::pair<std::uint64_t, std::size_t>> rule_group(rules.size());

    for (std::size_t ri = 0; ri < rules.size(); ++ri) {
        const auto& rule = rules[ri];
        std::vector<std::uint32_t> key;
        for (auto i : ds.part(false_partition(rule.direction)))
            if (rule.itemset.is_subset_of(ds.instances[i].items)) key.push_back(i);
        // direction folded into the hash so opposite directions never group
        std::uint64_t h = rule.direction == Direction::Positive ? 0x9e3779b97f4a7c15ull : 0x517cc1b727220a95ull;
        for (auto v : key) {
            h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        auto& bucket = groups[h];
        std::size_t gi = bucket.size();
        for (std::size_t g = 0; g < bucket.size(); ++g) {
            if (bucket[g].key == key &&
                rules[bucket[g].members.front()].direction == rule.direction) {
                gi = g;
                break;
            }
        }
        if (gi == bucket.size()) bucket.push_back({key, {}});
        bucket[gi].members.push_back(ri);
        rule_group[ri] = {h, gi};
    }

    std::vector<char> keep(rules.size(), 1);
    for (auto& [h, bucket] : groups) {
        for (auto& g : bucket) {
            for (auto a : g.members) {
                for (auto b : g.members) {
                    if (a == b || !keep[a]) continue;
                    const auto& xa = rules[a].itemset;
                    const auto& xb = rules[b].itemset;
                    if (xb.is_subset_of(xa) && xb != xa) {
                        keep[a] = 0;
                        break;
                    }
                }
            }
        }
    }

    std::vector<CorrectionRule> out;
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (keep[i]) out.push_back(rules[i]);
    return out;
}

// CRMiner: enumerate acceptable correction rules for each requested
// direction, with Lemma-style lattice pruning and optional minimal mode.
// Output order is deterministic: direction, lattice discovery order, lex
// itemset. Worker count never changes the result.
inline MinedRuleSet mine(const Dataset& ds, const MinerConfig& cfg) {
    MinedRuleSet out;
    if (ds.size() == 0) {
        out.diagnostics.push_back("empty dataset: nothing to mine");
        return out;
    }
    const auto cands = delta_candidates(ds);

    bool any_direction = false;
    for (Direction dir : {Direction::Positive, Direction::Negative}) {
        if (dir == Direction::Positive && !cfg.use_positive) continue;
        if (dir == Direction::Negative && !cfg.use_negative) continue;
        if (n_false(ds, dir) == 0) {
            out.diagnostics.push_back(std::string("direction ") + direction_name(dir) +
                                      ": no misclassified instances, skipped");
            continue;
        }
        any_direction = true;

        detail::DirectionMiner miner(ds, dir, cfg, cands);
        auto lattices = miner.enumerate();
        out.counters.lattices_enumerated += lattices.size();

        std::vector<detail::DirectionMiner::ScanResult> results(lattices.size());
        const int workers = std::max(1, cfg.workers);
        if (workers == 1 || lattices.size() < 2) {
            for (std::size_t i = 0; i < lattices.size(); ++i)
                results[i] = miner.scan(lattices[i], static_cast<std::int32_t>(i));
        } else {
            std::atomic<std::size_t> next{0};
            auto work = [&]() {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= lattices.size()) break;
                    results[i] = miner.scan(lattices[i], static_cast<std::int32_t>(i));
                }
            };
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work);
            for (auto& t : pool) t.join();
        }

        for (std::size_t i = 0; i < results.size(); ++i) {
            auto& r = results[i];
            out.counters.itemsets_scanned += r.itemsets_scanned;
            if (r.pruned) ++out.counters.lattices_pruned;
            std::sort(r.rules.begin(), r.rules.end(),
                      [](const CorrectionRule& a, const CorrectionRule& b) {
                          return lex_less(a.itemset, b.itemset);
                      });
            for (auto& rule : r.rules) out.rules.push_back(std::move(rule));
        }
    }

    if (!any_direction)
        out.diagnostics.push_back("no direction had misclassified instances; result is empty");

    if (cfg.minimal) out.rules = minimal_filter(out.rules, ds);
    return out;
}

} // namespace crmine
