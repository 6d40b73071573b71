// crmine: correction rule mining pipeline over score-annotated tables.
//
// Exit codes: 0 success, 1 usage error, 2 data/file error.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crmine/crmine.hpp"

namespace {

using namespace crmine;

int default_workers() {
    if (const char* env = std::getenv("CRMINE_WORKERS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

struct PrepareArgs {
    std::string input, output;
    std::string score_col = "score";
    std::string label_col = "label";
    std::string delimiter = ",";
    std::string transform = "identity";
    int bins = 4;
    bool neq_items = false;
    std::string vocab_in, vocab_out;
};

void cmd_prepare(const PrepareArgs& a) {
    TableSchema schema{a.score_col, a.label_col, a.delimiter.empty() ? ',' : a.delimiter[0]};
    auto table = load_table(a.input, schema);
    if (table.rows_dropped > 0)
        std::cerr << "note: dropped " << table.rows_dropped << " rows with missing attributes\n";

    DiscretizationSpec spec;
    ItemVocabulary vocab;
    if (!a.vocab_in.empty()) {
        auto loaded = vocab_from_json(ordered_json::parse(read_text(a.vocab_in)));
        spec = std::move(loaded.first);
        vocab = std::move(loaded.second);
    } else {
        spec = fit_discretization(table, a.bins, a.neq_items);
        vocab = build_vocabulary(spec);
    }
    const auto mode = a.transform == "tanh" ? ScoreTransform::Tanh : ScoreTransform::Identity;
    auto ds = encode(table, spec, vocab, mode);
    save_dataset(a.output, ds, spec, vocab);
    if (!a.vocab_out.empty())
        save_text_atomic(a.vocab_out, vocab_to_json(spec, vocab).dump(2) + "\n");
    std::cerr << "prepared " << ds.size() << " instances, " << vocab.size() << " items\n";
}

struct MineArgs {
    std::string input, output, stats_out;
    MinerConfig cfg;
    std::string directions = "both";
};

void cmd_mine(const MineArgs& a) {
    auto file = load_dataset(a.input);
    MinerConfig cfg = a.cfg;
    cfg.use_positive = a.directions != "negative";
    cfg.use_negative = a.directions != "positive";

    const auto t0 = std::chrono::steady_clock::now();
    auto mined = mine(file.data, cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (const auto& d : mined.diagnostics) std::cerr << "note: " << d << "\n";
    save_rules(a.output, mined.rules, file.vocab);
    if (!a.stats_out.empty()) {
        ordered_json stats;
        stats["rule_count"] = mined.rules.size();
        stats["lattices_enumerated"] = mined.counters.lattices_enumerated;
        stats["lattices_pruned"] = mined.counters.lattices_pruned;
        stats["itemsets_scanned"] = mined.counters.itemsets_scanned;
        stats["wall_time_seconds"] = secs;
        save_text_atomic(a.stats_out, stats.dump(2) + "\n");
    }
    std::cerr << "mined " << mined.rules.size() << " rules ("
              << mined.counters.lattices_enumerated << " lattices, "
              << mined.counters.lattices_pruned << " pruned) in " << secs << "s\n";
}

struct FilterArgs {
    std::string rules, input, output;
    double threshold = 0.0;
};

void cmd_validate(const FilterArgs& a) {
    auto file = load_dataset(a.input);
    auto rf = load_rules(a.rules, file.vocab);
    auto kept = denoise(rf.rules, file.data, a.threshold);
    save_rules(a.output, kept, file.vocab);
    std::cerr << "kept " << kept.size() << " of " << rf.rules.size() << " rules\n";
}

void cmd_drift_filter(const FilterArgs& a) {
    auto file = load_dataset(a.input);
    auto rf = load_rules(a.rules, file.vocab);
    auto kept = drift_filter(rf.rules, file.data, a.threshold);
    save_rules(a.output, kept, file.vocab);
    std::cerr << "kept " << kept.size() << " of " << rf.rules.size() << " rules\n";
}

struct SummarizeArgs {
    std::string rules, input, output;
    ClusterConfig cfg;
};

void cmd_summarize(const SummarizeArgs& a) {
    auto file = load_dataset(a.input);
    auto rf = load_rules(a.rules, file.vocab);
    auto reps = kmodes_summarize(rf.rules, file.data, a.cfg);
    save_rules(a.output, reps, file.vocab);
    std::cerr << "summarized " << rf.rules.size() << " rules into " << reps.size() << "\n";
}

struct BuildArgs {
    std::string rules, input, output;
    std::string model = "crs";
    std::string objective = "accuracy";
    std::size_t size_limit = 0; // 0 = unlimited
};

void cmd_build(const BuildArgs& a) {
    auto file = load_dataset(a.input);
    auto rf = load_rules(a.rules, file.vocab);
    const auto kind = a.model == "crl" ? ModelKind::RuleList : ModelKind::RuleSet;
    const auto limit = a.size_limit == 0 ? rf.rules.size() : a.size_limit;
    auto model = greedy_build(rf.rules, file.data, objective_from_name(a.objective), limit, kind);
    save_rules(a.output, model.rules, file.vocab, model.kind);
    std::cerr << "built " << a.model << " with " << model.rules.size() << " rules\n";
}

struct ApplyArgs {
    std::string model, input, output;
};

void cmd_apply(const ApplyArgs& a) {
    auto file = load_dataset(a.input);
    auto rf = load_rules(a.model, file.vocab);
    CorrectionModel model;
    model.kind = rf.model.value_or(ModelKind::RuleSet);
    model.rules = rf.rules;

    Dataset corrected = file.data;
    for (auto& inst : corrected.instances) inst.score = apply_model(model, inst);
    corrected.rebuild_partitions();
    save_dataset(a.output, corrected, file.spec, file.vocab);
    std::cerr << "applied " << model.rules.size() << " rules to " << corrected.size()
              << " instances\n";
}

struct EvaluateArgs {
    std::string input, model, output;
};

void cmd_evaluate(const EvaluateArgs& a) {
    auto file = load_dataset(a.input);
    CorrectionModel model;
    bool have_model = false;
    if (!a.model.empty()) {
        auto rf = load_rules(a.model, file.vocab);
        model.kind = rf.model.value_or(ModelKind::RuleSet);
        model.rules = rf.rules;
        have_model = true;
    }
    auto m = evaluate(file.data, have_model ? &model : nullptr);
    ordered_json o;
    o["accuracy"] = m.accuracy;
    o["precision"] = m.precision;
    o["recall"] = m.recall;
    o["f1"] = m.f1;
    o["log_loss"] = m.log_loss;
    o["n"] = m.n;
    std::cout << o.dump(2) << "\n";
    if (!a.output.empty()) save_text_atomic(a.output, o.dump(2) + "\n");
}

struct ScenarioArgs {
    std::string kind;
    std::string output_dir;
    std::string input;
    std::uint64_t seed = 0;
    std::size_t n_instances = 10000;
    std::size_t n_attributes = 10;
    DriftConfig drift;
    bool keep_scores = false;
    SplitSpec lack;
    std::size_t n_items = 20;
    std::vector<std::uint32_t> planted_items = {0, 1, 2};
    double flip_rate = 0.9;
    double noise = 0.05;
};

void write_split(const std::string& dir, const std::string& name, const Dataset& full,
                 const std::vector<std::uint32_t>& idx, const DiscretizationSpec& spec,
                 const ItemVocabulary& vocab) {
    save_dataset(dir + "/" + name + ".json", full.subset(idx), spec, vocab);
}

void cmd_gen_scenario(const ScenarioArgs& a) {
    if (a.kind == "lack") {
        if (a.input.empty()) throw DataError("gen-scenario --kind lack requires --input");
        auto file = load_dataset(a.input);
        auto splits = gen_lack_splits(file.data, a.lack, a.seed);
        write_split(a.output_dir, "trn", file.data, splits.trn, file.spec, file.vocab);
        write_split(a.output_dir, "mng", file.data, splits.mng, file.spec, file.vocab);
        write_split(a.output_dir, "aug", file.data, splits.aug, file.spec, file.vocab);
        write_split(a.output_dir, "tst", file.data, splits.tst, file.spec, file.vocab);
        save_text_atomic(a.output_dir + "/manifest.json",
                         lack_splits_to_json(splits, a.seed).dump(2) + "\n");
        std::cerr << "lack splits: trn " << splits.trn.size() << ", mng " << splits.mng.size()
                  << ", aug " << splits.aug.size() << ", tst " << splits.tst.size() << "\n";
        return;
    }
    if (a.kind == "drift") {
        DiscretizationSpec spec;
        ItemVocabulary vocab;
        Dataset ds;
        if (!a.input.empty()) {
            auto file = load_dataset(a.input);
            spec = std::move(file.spec);
            vocab = std::move(file.vocab);
            ds = std::move(file.data);
        } else {
            auto table = synth_numeric_table(a.n_instances, a.n_attributes, a.seed);
            spec = fit_discretization(table, 4);
            vocab = build_vocabulary(spec);
            ds = encode(table, spec, vocab);
        }
        auto sc = gen_drift_scenario(ds, vocab, a.seed, a.drift);
        if (!a.keep_scores) simulate_drift_scores(ds, sc, a.seed);
        write_split(a.output_dir, "trn", ds, sc.trn, spec, vocab);
        write_split(a.output_dir, "mng", ds, sc.mng, spec, vocab);
        write_split(a.output_dir, "tst", ds, sc.tst, spec, vocab);
        save_dataset(a.output_dir + "/full.json", ds, spec, vocab);
        save_text_atomic(a.output_dir + "/manifest.json",
                         scenario_to_json(sc, vocab).dump(2) + "\n");
        std::cerr << "drift scenario: " << sc.regions.size() << " regions over " << ds.size()
                  << " instances\n";
        return;
    }
    if (a.kind == "planted") {
        auto planted = plant_rule_dataset(a.n_items, a.n_instances, a.planted_items, a.flip_rate,
                                          a.noise, a.seed);
        DiscretizationSpec spec; // synthetic one-category attributes
        for (std::uint32_t i = 0; i < a.n_items; ++i)
            spec.attributes.push_back({"f" + std::to_string(i), false, {}, {"1"}});
        save_dataset(a.output_dir + "/dataset.json", planted.data, spec, planted.vocab);
        ordered_json manifest;
        manifest["kind"] = "planted";
        manifest["seed"] = a.seed;
        manifest["planted_items"] = planted.planted.to_ids();
        manifest["truth_hits"] = planted.truth_hits;
        save_text_atomic(a.output_dir + "/manifest.json", manifest.dump(2) + "\n");
        std::cerr << "planted dataset: " << planted.data.size() << " instances, "
                  << planted.truth_hits.size() << " ground-truth hits\n";
        return;
    }
    throw DataError("unknown scenario kind: " + a.kind);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"correction rule mining for binary classifier debugging"};
    app.require_subcommand(1);

    PrepareArgs prep;
    auto* prepare = app.add_subcommand("prepare", "discretize a delimited table into a dataset");
    prepare->add_option("--input", prep.input)->required();
    prepare->add_option("--output", prep.output)->required();
    prepare->add_option("--score-col", prep.score_col);
    prepare->add_option("--label-col", prep.label_col);
    prepare->add_option("--delimiter", prep.delimiter);
    prepare->add_option("--score-transform", prep.transform)
        ->check(CLI::IsMember({"identity", "tanh"}));
    prepare->add_option("--bins", prep.bins)->check(CLI::PositiveNumber);
    prepare->add_flag("--neq-items", prep.neq_items);
    prepare->add_option("--vocab-in", prep.vocab_in);
    prepare->add_option("--vocab-out", prep.vocab_out);

    MineArgs mine_args;
    mine_args.cfg.workers = default_workers();
    bool no_prune = false;
    auto* mine_cmd = app.add_subcommand("mine", "enumerate acceptable correction rules");
    mine_cmd->add_option("--input", mine_args.input)->required();
    mine_cmd->add_option("--output", mine_args.output)->required();
    mine_cmd->add_option("--stats-out", mine_args.stats_out);
    mine_cmd->add_option("-K,--max-len", mine_args.cfg.max_len)->check(CLI::PositiveNumber);
    mine_cmd->add_option("--theta", mine_args.cfg.theta)->check(CLI::Range(0.0, 1.0));
    mine_cmd->add_option("--lambda", mine_args.cfg.lambda)->check(CLI::Range(0.0, 1.0));
    mine_cmd->add_flag("--minimal", mine_args.cfg.minimal);
    mine_cmd->add_flag("--no-prune", no_prune);
    mine_cmd->add_option("--directions", mine_args.directions)
        ->check(CLI::IsMember({"both", "positive", "negative"}));
    mine_cmd->add_option("--workers", mine_args.cfg.workers)->check(CLI::PositiveNumber);

    FilterArgs val_args;
    val_args.threshold = 0.7;
    auto* validate = app.add_subcommand("validate", "drop rules that fail on validation data");
    validate->add_option("--rules", val_args.rules)->required();
    validate->add_option("--input", val_args.input)->required();
    validate->add_option("--output", val_args.output)->required();
    validate->add_option("--lambda-valid", val_args.threshold)->check(CLI::Range(0.0, 1.0));

    FilterArgs drift_args;
    drift_args.threshold = 0.5;
    auto* drift = app.add_subcommand("drift-filter", "keep rules that fail on the old data");
    drift->add_option("--rules", drift_args.rules)->required();
    drift->add_option("--input", drift_args.input)->required();
    drift->add_option("--output", drift_args.output)->required();
    drift->add_option("--lambda-drift", drift_args.threshold)->check(CLI::Range(0.0, 1.0));

    SummarizeArgs sum_args;
    auto* summarize = app.add_subcommand("summarize", "k-modes representatives per direction");
    summarize->add_option("--rules", sum_args.rules)->required();
    summarize->add_option("--input", sum_args.input)->required();
    summarize->add_option("--output", sum_args.output)->required();
    summarize->add_option("--clusters", sum_args.cfg.k)->check(CLI::PositiveNumber);
    summarize->add_option("--max-iters", sum_args.cfg.max_iters);
    summarize->add_option("--seed", sum_args.cfg.seed);

    BuildArgs build_args;
    auto* build = app.add_subcommand("build", "greedily build a correction model");
    build->add_option("--rules", build_args.rules)->required();
    build->add_option("--input", build_args.input)->required();
    build->add_option("--output", build_args.output)->required();
    build->add_option("--model", build_args.model)->check(CLI::IsMember({"crl", "crs"}));
    build->add_option("--objective", build_args.objective)
        ->check(CLI::IsMember({"accuracy", "f1", "log_loss"}));
    build->add_option("-M,--size-limit", build_args.size_limit);

    ApplyArgs apply_args;
    auto* apply = app.add_subcommand("apply", "rewrite scores with a correction model");
    apply->add_option("--model", apply_args.model)->required();
    apply->add_option("--input", apply_args.input)->required();
    apply->add_option("--output", apply_args.output)->required();

    EvaluateArgs eval_args;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "metrics with or without a model");
    evaluate_cmd->add_option("--input", eval_args.input)->required();
    evaluate_cmd->add_option("--model", eval_args.model);
    evaluate_cmd->add_option("--output", eval_args.output);

    ScenarioArgs sc_args;
    auto* gen = app.add_subcommand("gen-scenario", "generate synthetic evaluation scenarios");
    gen->add_option("--kind", sc_args.kind)
        ->required()
        ->check(CLI::IsMember({"lack", "drift", "planted"}));
    gen->add_option("--output-dir", sc_args.output_dir)->required();
    gen->add_option("--input", sc_args.input);
    gen->add_option("--seed", sc_args.seed);
    gen->add_option("--n-instances", sc_args.n_instances);
    gen->add_option("--n-attributes", sc_args.n_attributes);
    gen->add_option("--n-regions", sc_args.drift.n_regions);
    gen->add_option("--rho", sc_args.drift.shifted_trn_weight)->check(CLI::Range(0.0, 1.0));
    gen->add_flag("--keep-scores", sc_args.keep_scores);
    gen->add_option("--trn-count", sc_args.lack.trn_count);
    gen->add_option("--mng-count", sc_args.lack.mng_count);
    gen->add_option("--n-items", sc_args.n_items);
    gen->add_option("--planted-items", sc_args.planted_items)->delimiter(',');
    gen->add_option("--flip-rate", sc_args.flip_rate)->check(CLI::Range(0.0, 1.0));
    gen->add_option("--noise", sc_args.noise);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }
    mine_args.cfg.pruning = !no_prune;

    try {
        if (prepare->parsed()) cmd_prepare(prep);
        if (mine_cmd->parsed()) cmd_mine(mine_args);
        if (validate->parsed()) cmd_validate(val_args);
        if (drift->parsed()) cmd_drift_filter(drift_args);
        if (summarize->parsed()) cmd_summarize(sum_args);
        if (build->parsed()) cmd_build(build_args);
        if (apply->parsed()) cmd_apply(apply_args);
        if (evaluate_cmd->parsed()) cmd_evaluate(eval_args);
        if (gen->parsed()) cmd_gen_scenario(sc_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
