#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "crmine/miner.hpp"
#include "crmine/rng.hpp"
#include "support/oracle.hpp"
#include "support/testgen.hpp"

using namespace crmine;

namespace {

std::vector<oracle::Rule> as_oracle_rules(const MinedRuleSet& mined) {
    std::vector<oracle::Rule> out;
    for (const auto& r : mined.rules) {
        oracle::Rule o;
        o.direction = r.direction;
        o.items = r.itemset.to_ids();
        o.delta = r.delta;
        o.support = r.support;
        o.confidence = r.confidence;
        o.n_true_changed = r.n_true_changed;
        o.n_false_changed = r.n_false_changed;
        out.push_back(std::move(o));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ItemBitset> false_transactions(const Dataset& ds, Direction dir) {
    std::vector<ItemBitset> out;
    for (auto i : ds.part(false_partition(dir))) out.push_back(ds.instances[i].items);
    return out;
}

Dataset single_fn_dataset() {
    Dataset ds;
    ItemBitset t(2);
    t.set(0);
    ds.instances.push_back({t, -0.4, 1});
    ds.rebuild_partitions();
    return ds;
}

} // namespace

TEST_CASE("reorder_items ascending count with ties on original id") {
    // item 0 in 5 transactions, item 1 in 2
    std::vector<ItemBitset> txns;
    for (int i = 0; i < 5; ++i) {
        ItemBitset t(3);
        t.set(0);
        if (i < 2) t.set(1);
        txns.push_back(t);
    }
    auto perm = reorder_items(txns, 3);
    REQUIRE(perm[2] == 0); // count 0 first
    REQUIRE(perm[1] == 1);
    REQUIRE(perm[0] == 2);

    // equal counts preserve original order
    std::vector<ItemBitset> eq;
    ItemBitset t(2);
    t.set(0);
    t.set(1);
    eq.push_back(t);
    auto perm2 = reorder_items(eq, 2);
    REQUIRE(perm2 == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("enumerate_lattices covers the frequent itemsets disjointly") {
    // Two identical transactions {x1,x2}
    std::vector<ItemBitset> txns;
    ItemBitset t(2);
    t.set(0);
    t.set(1);
    txns.push_back(t);
    txns.push_back(t);

    auto lattices = enumerate_lattices(txns, 2, 0.5, 2);
    std::vector<std::vector<std::uint32_t>> members;
    for (const auto& lat : lattices)
        for (auto& m : lattice_members(lat)) members.push_back(m);
    std::sort(members.begin(), members.end());
    auto want = oracle::frequent_itemsets(txns, 2, 0.5, 2);
    REQUIRE(members == want);
    REQUIRE(want == std::vector<std::vector<std::uint32_t>>{{0}, {0, 1}, {1}});
}

TEST_CASE("enumerate_lattices single transaction and empty cases") {
    std::vector<ItemBitset> txns;
    ItemBitset t(1);
    t.set(0);
    txns.push_back(t);
    auto lattices = enumerate_lattices(txns, 1, 1.0, 1);
    std::size_t covered = 0;
    for (const auto& lat : lattices) covered += lattice_members(lat).size();
    REQUIRE(covered == 1);

    // theta = 1 with no common item: nothing but the root, which covers
    // nothing non-empty
    std::vector<ItemBitset> txns2;
    ItemBitset a(2), b(2);
    a.set(0);
    b.set(1);
    txns2.push_back(a);
    txns2.push_back(b);
    auto l2 = enumerate_lattices(txns2, 2, 1.0, 2);
    std::size_t covered2 = 0;
    for (const auto& lat : l2) covered2 += lattice_members(lat).size();
    REQUIRE(covered2 == 0);
}

TEST_CASE("lattice cover property on random datasets") {
    Rng rng(555);
    auto corpus = testgen::make_corpus(555, 25, 10, 60);
    for (const auto& ds : corpus) {
        const double theta = rng.bernoulli(0.5) ? 0.0 : rng.uniform(0.05, 0.5);
        const int K = 1 + static_cast<int>(rng.index(3));
        for (auto dir : {Direction::Positive, Direction::Negative}) {
            auto txns = false_transactions(ds, dir);
            if (txns.empty()) continue;
            const std::size_t n_items = txns[0].size();
            auto lattices = enumerate_lattices(txns, n_items, theta, K);

            std::map<std::vector<std::uint32_t>, int> seen;
            for (const auto& lat : lattices) {
                // lattice validity: the whole family hits the same transactions
                auto core_set = ItemBitset::from_ids(n_items, lat.core);
                auto top = core_set;
                for (auto j : lat.tail) top.set(j);
                std::vector<std::uint32_t> core_hits, top_hits;
                for (std::uint32_t i = 0; i < txns.size(); ++i) {
                    if (core_set.is_subset_of(txns[i])) core_hits.push_back(i);
                    if (top.is_subset_of(txns[i])) top_hits.push_back(i);
                }
                REQUIRE(core_hits == top_hits);
                REQUIRE(core_hits == lat.false_hits);
                for (auto& m : lattice_members(lat, K)) ++seen[m];
            }
            auto frequent = oracle::frequent_itemsets(txns, n_items, theta, K);
            REQUIRE(seen.size() == frequent.size());
            for (const auto& f : frequent) {
                auto it = seen.find(f);
                REQUIRE(it != seen.end());
                REQUIRE(it->second == 1); // exactly one lattice holds it
            }
        }
    }
}

TEST_CASE("scan respects the length cut and skips the empty core") {
    // L({x1},{x2}) with K=1: only {x1} may be evaluated. Build data where
    // x2 always accompanies x1 in the false set.
    Dataset ds;
    ItemBitset both(2);
    both.set(0);
    both.set(1);
    ds.instances.push_back({both, -0.4, 1});
    ds.instances.push_back({both, -0.5, 1});
    ds.rebuild_partitions();

    MinerConfig cfg;
    cfg.max_len = 1;
    cfg.theta = 0.0;
    cfg.lambda = 0.0;
    auto mined = mine(ds, cfg);
    for (const auto& r : mined.rules) REQUIRE(r.itemset.count() <= 1);
    // both singletons acceptable here: {x1} and {x2} fix both FNs
    REQUIRE(mined.rules.size() == 2);

    cfg.max_len = 2;
    auto mined2 = mine(ds, cfg);
    REQUIRE(mined2.rules.size() == 3); // {x1}, {x2}, {x1,x2}; the empty set never
}

TEST_CASE("minimal mode backtracks early") {
    Dataset ds;
    ItemBitset both(2);
    both.set(0);
    both.set(1);
    ds.instances.push_back({both, -0.4, 1});
    ds.rebuild_partitions();

    MinerConfig cfg;
    cfg.max_len = 2;
    cfg.theta = 0.0;
    cfg.lambda = 0.0;
    cfg.minimal = true;
    auto mined = mine(ds, cfg);
    REQUIRE(mined.rules.size() == 2); // {x1} and {x2}; {x1,x2} eliminated
    for (const auto& r : mined.rules) REQUIRE(r.itemset.count() == 1);
    // early backtrack means the pair was never even scanned
    REQUIRE(mined.counters.itemsets_scanned == 2);
}

TEST_CASE("minimal_filter groups by false-hit set") {
    Dataset ds;
    ItemBitset t01(3), t0(3);
    t01.set(0);
    t01.set(1);
    t0.set(0);
    ds.instances.push_back({t01, -0.4, 1});
    ds.instances.push_back({t0, 0.5, -1}); // FP so the negative direction exists too
    ds.rebuild_partitions();

    auto rule = [&](std::vector<std::uint32_t> ids, double delta) {
        CorrectionRule r;
        r.itemset = ItemBitset::from_ids(3, ids);
        r.delta = delta;
        r.direction = direction_of_delta(delta);
        return r;
    };

    // {x0} and {x0,x1} share the false-hit set {0}: keep the subset only
    auto filtered = minimal_filter({rule({0}, 0.7), rule({0, 1}, 0.7)}, ds);
    REQUIRE(filtered.size() == 1);
    REQUIRE(filtered[0].itemset.to_ids() == std::vector<std::uint32_t>{0});

    // incomparable itemsets with the same hits: both kept
    auto both = minimal_filter({rule({0, 1}, 0.7), rule({1, 2}, 0.7)}, ds);
    REQUIRE(both.size() == 2);

    // same itemset, different directions: different groups, both kept
    auto dirs = minimal_filter({rule({0}, 0.7), rule({0}, -0.7)}, ds);
    REQUIRE(dirs.size() == 2);
}

TEST_CASE("mine on a single false negative") {
    auto ds = single_fn_dataset();
    MinerConfig cfg;
    cfg.max_len = 1;
    cfg.theta = 1.0;
    cfg.lambda = 1.0;
    auto mined = mine(ds, cfg);
    REQUIRE(mined.rules.size() == 1);
    REQUIRE(mined.rules[0].itemset.to_ids() == std::vector<std::uint32_t>{0});
    REQUIRE(mined.rules[0].delta == 0.7);
    REQUIRE(mined.rules[0].direction == Direction::Positive);
    REQUIRE(mined.rules[0].support == 1.0);
    REQUIRE(mined.rules[0].confidence == 1.0);
}

TEST_CASE("mine finds nothing when predictions are all correct") {
    Dataset ds;
    ItemBitset t(2);
    t.set(0);
    ds.instances.push_back({t, 0.4, 1});
    ds.instances.push_back({t, -0.4, -1});
    ds.rebuild_partitions();
    auto mined = mine(ds, MinerConfig{});
    REQUIRE(mined.rules.empty());
    REQUIRE_FALSE(mined.diagnostics.empty());
}

TEST_CASE("direction restriction skips the wrong side") {
    Dataset ds; // only FPs
    ItemBitset t(2);
    t.set(0);
    ds.instances.push_back({t, 0.4, -1});
    ds.rebuild_partitions();
    MinerConfig cfg;
    cfg.theta = 0.0;
    cfg.lambda = 0.0;
    cfg.use_negative = false;
    auto mined = mine(ds, cfg);
    REQUIRE(mined.rules.empty());
}

TEST_CASE("miner equals the brute-force oracle on random datasets") {
    Rng rng(9001);
    auto corpus = testgen::make_corpus(9001, 40, 10, 80);
    for (const auto& ds : corpus) {
        MinerConfig cfg;
        cfg.max_len = 1 + static_cast<int>(rng.index(3));
        cfg.theta = std::vector<double>{0.0, 0.1, 0.3}[rng.index(3)];
        cfg.lambda = std::vector<double>{0.0, 0.5, 0.9}[rng.index(3)];
        auto got = as_oracle_rules(mine(ds, cfg));
        auto want = oracle::mine(ds, cfg.max_len, cfg.theta, cfg.lambda);
        REQUIRE(got == want);
    }
}

TEST_CASE("pruning changes nothing but skips lattices on low-confidence data") {
    Rng rng(777);
    auto corpus = testgen::make_corpus(777, 20, 9, 60);
    for (const auto& ds : corpus) {
        MinerConfig cfg;
        cfg.max_len = 2;
        cfg.theta = 0.0;
        cfg.lambda = 0.9;
        auto pruned = mine(ds, cfg);
        cfg.pruning = false;
        auto full = mine(ds, cfg);
        REQUIRE(as_oracle_rules(pruned) == as_oracle_rules(full));
        REQUIRE(full.counters.lattices_pruned == 0);
        REQUIRE(pruned.counters.itemsets_scanned <= full.counters.itemsets_scanned);
    }

    // crafted low-confidence data: every correction breaks many true
    // instances, so lattices get pruned
    Dataset bad;
    ItemBitset t(4);
    for (std::uint32_t i = 0; i < 4; ++i) t.set(i);
    bad.instances.push_back({t, -0.4, 1});
    for (int i = 0; i < 30; ++i) bad.instances.push_back({t, -0.3, -1});
    bad.rebuild_partitions();
    MinerConfig cfg;
    cfg.theta = 0.0;
    cfg.lambda = 0.9;
    auto mined = mine(bad, cfg);
    REQUIRE(mined.counters.lattices_pruned >= 1);
    REQUIRE(mined.rules.empty());
    // oracle confirms nothing acceptable exists
    REQUIRE(oracle::mine(bad, cfg.max_len, cfg.theta, cfg.lambda).empty());
}

TEST_CASE("lambda 0 never prunes") {
    auto ds = single_fn_dataset();
    MinerConfig cfg;
    cfg.theta = 0.0;
    cfg.lambda = 0.0;
    auto mined = mine(ds, cfg);
    REQUIRE(mined.counters.lattices_pruned == 0);
}

TEST_CASE("minimal mode equals the full output post-filtered") {
    Rng rng(12121);
    auto corpus = testgen::make_corpus(12121, 25, 9, 60);
    for (const auto& ds : corpus) {
        MinerConfig cfg;
        cfg.max_len = 2;
        cfg.theta = std::vector<double>{0.0, 0.1}[rng.index(2)];
        cfg.lambda = std::vector<double>{0.0, 0.5, 0.9}[rng.index(3)];

        cfg.minimal = true;
        auto minimal = mine(ds, cfg);
        cfg.minimal = false;
        auto full = mine(ds, cfg);
        auto filtered = minimal_filter(full.rules, ds);

        MinedRuleSet wrapped;
        wrapped.rules = filtered;
        REQUIRE(as_oracle_rules(minimal) == as_oracle_rules(wrapped));
    }
}

TEST_CASE("lemma: confidence grows toward the lattice top") {
    Rng rng(404);
    auto corpus = testgen::make_corpus(404, 15, 9, 60);
    std::size_t checked = 0;
    for (const auto& ds : corpus) {
        auto cands = delta_candidates(ds);
        for (auto dir : {Direction::Positive, Direction::Negative}) {
            auto txns = false_transactions(ds, dir);
            if (txns.empty()) continue;
            const std::size_t n_items = txns[0].size();
            auto lattices = enumerate_lattices(txns, n_items, 0.0, 3);
            for (const auto& lat : lattices) {
                if (lat.core.empty() && lat.tail.empty()) continue;
                for (int rep = 0; rep < 3; ++rep) {
                    // random nested pair core+T1 <= core+T2
                    std::vector<std::uint32_t> t1, t2;
                    for (auto j : lat.tail) {
                        const auto pick = rng.index(3);
                        if (pick >= 1) t2.push_back(j);
                        if (pick == 2) t1.push_back(j);
                    }
                    auto y = ItemBitset::from_ids(n_items, lat.core);
                    auto z = y;
                    for (auto j : t1) y.set(j);
                    for (auto j : t2) z.set(j);
                    if (y == z || y.empty()) continue;
                    auto ey = optimize_delta(y, dir, ds, 0.05, cands);
                    auto ez = optimize_delta(z, dir, ds, 0.05, cands);
                    REQUIRE(ey.confidence <= ez.confidence);
                    ++checked;
                }
            }
        }
    }
    REQUIRE(checked > 100);
}

TEST_CASE("mined rules pass an independent acceptability audit") {
    Rng rng(606);
    auto corpus = testgen::make_corpus(606, 10, 9, 60);
    for (const auto& ds : corpus) {
        MinerConfig cfg;
        cfg.max_len = 3;
        cfg.theta = 0.1;
        cfg.lambda = 0.5;
        auto mined = mine(ds, cfg);
        auto deltas = oracle::candidate_deltas(ds);
        for (const auto& r : mined.rules) {
            REQUIRE(r.itemset.count() <= 3);
            REQUIRE(r.delta != 0.0);
            auto nf = n_false(ds, r.direction);
            auto opt = oracle::optimize(r.itemset, r.direction, ds, deltas, nf, cfg.theta);
            REQUIRE(opt.feasible);
            REQUIRE(opt.delta == r.delta); // condition (iv)
            REQUIRE(oracle::ratio_ge(opt.counts.ct, nf, cfg.theta));
            REQUIRE(oracle::ratio_ge(opt.counts.ct, opt.counts.ct + opt.counts.cf, cfg.lambda));
        }
    }
}

TEST_CASE("worker count does not change the result") {
    auto corpus = testgen::make_corpus(90210, 6, 10, 120);
    for (const auto& ds : corpus) {
        MinerConfig cfg;
        cfg.max_len = 3;
        cfg.theta = 0.05;
        cfg.lambda = 0.5;
        cfg.workers = 1;
        auto one = mine(ds, cfg);
        cfg.workers = 4;
        auto four = mine(ds, cfg);
        REQUIRE(as_oracle_rules(one) == as_oracle_rules(four));
        REQUIRE(one.counters.itemsets_scanned == four.counters.itemsets_scanned);
        REQUIRE(one.counters.lattices_pruned == four.counters.lattices_pruned);
        // canonical order too, not just set equality
        REQUIRE(one.rules.size() == four.rules.size());
        for (std::size_t i = 0; i < one.rules.size(); ++i) {
            REQUIRE(one.rules[i].itemset == four.rules[i].itemset);
            REQUIRE(one.rules[i].delta == four.rules[i].delta);
        }
    }
}
