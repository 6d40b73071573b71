#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <string>

#include "crmine/crmine.hpp"
#include "support/testgen.hpp"

using namespace crmine;

namespace {

std::string tmp_dir() {
    static int counter = 0;
    std::string dir = "/tmp/crmine_test_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++);
    if (std::system(("mkdir -p " + dir).c_str()) != 0) throw std::runtime_error("mkdir failed");
    return dir;
}

std::string cli_bin() {
    const char* env = std::getenv("CRMINE_BIN");
    return env ? env : "";
}

std::string data_dir() {
    const char* env = std::getenv("CRMINE_DATA_DIR");
    return env ? env : "../data";
}

int run_cli(const std::string& args) {
    const int rc = std::system((cli_bin() + " " + args + " 2>/dev/null").c_str());
    return WEXITSTATUS(rc);
}

struct Fixture {
    DiscretizationSpec spec;
    ItemVocabulary vocab;
    Dataset ds;
    std::vector<CorrectionRule> rules;
};

Fixture make_fixture() {
    Fixture f;
    f.spec.attributes.push_back({"age", true, {30.0, 45.0}, {}});
    f.spec.attributes.push_back({"job", false, {}, {"a", "b"}});
    f.vocab = build_vocabulary(f.spec);

    Rng rng(2024);
    for (int i = 0; i < 40; ++i) {
        Instance inst;
        inst.items = ItemBitset(f.vocab.size());
        const double age = rng.uniform(18, 70);
        const std::string job = rng.bernoulli(0.5) ? "a" : "b";
        for (const auto& it : f.vocab.items) {
            const bool match = it.numeric()
                                   ? (it.op == ItemOp::Less ? age < it.threshold()
                                                            : age >= it.threshold())
                                   : (job == it.category());
            if (match) inst.items.set(it.id);
        }
        inst.label = rng.bernoulli(0.5) ? 1 : -1;
        inst.score = rng.uniform(-0.95, 0.95);
        f.ds.instances.push_back(std::move(inst));
    }
    f.ds.rebuild_partitions();

    MinerConfig cfg;
    cfg.max_len = 2;
    cfg.theta = 0.1;
    cfg.lambda = 0.5;
    f.rules = mine(f.ds, cfg).rules;
    return f;
}

} // namespace

TEST_CASE("rules file round-trips byte-identically") {
    auto f = make_fixture();
    REQUIRE(!f.rules.empty());

    auto text = rules_to_text(f.rules, f.vocab);
    auto parsed = parse_rules_text(text, f.vocab);
    REQUIRE(parsed.rules.size() == f.rules.size());
    auto text2 = rules_to_text(parsed.rules, f.vocab);
    REQUIRE(text == text2);

    for (std::size_t i = 0; i < f.rules.size(); ++i) {
        REQUIRE(parsed.rules[i].itemset == f.rules[i].itemset);
        REQUIRE(parsed.rules[i].delta == f.rules[i].delta);
        REQUIRE(parsed.rules[i].support == f.rules[i].support);
        REQUIRE(parsed.rules[i].confidence == f.rules[i].confidence);
    }
}

TEST_CASE("rules file rejects a mismatched vocabulary") {
    auto f = make_fixture();
    auto text = rules_to_text(f.rules, f.vocab);

    DiscretizationSpec other_spec;
    other_spec.attributes.push_back({"age", true, {31.0, 45.0}, {}});
    auto other_vocab = build_vocabulary(other_spec);
    REQUIRE_THROWS_AS(parse_rules_text(text, other_vocab), DataError);
}

TEST_CASE("dataset file round-trips") {
    auto f = make_fixture();
    auto j = dataset_to_json(f.ds, f.spec, f.vocab);
    auto loaded = dataset_from_json(j);
    REQUIRE(loaded.data.size() == f.ds.size());
    for (std::size_t i = 0; i < f.ds.size(); ++i) {
        REQUIRE(loaded.data.instances[i].items == f.ds.instances[i].items);
        REQUIRE(loaded.data.instances[i].score == f.ds.instances[i].score);
        REQUIRE(loaded.data.instances[i].label == f.ds.instances[i].label);
    }
    REQUIRE(fingerprint_hex(loaded.vocab) == fingerprint_hex(f.vocab));
    // partitions rebuilt, not stored
    for (int p = 0; p < 4; ++p) REQUIRE(loaded.data.partitions[p] == f.ds.partitions[p]);
}

TEST_CASE("vocabulary json carries the discretization spec") {
    auto f = make_fixture();
    auto [spec, vocab] = vocab_from_json(vocab_to_json(f.spec, f.vocab));
    REQUIRE(spec.attributes.size() == f.spec.attributes.size());
    REQUIRE(spec.attributes[0].cuts == f.spec.attributes[0].cuts);
    REQUIRE(vocab.size() == f.vocab.size());
}

TEST_CASE("cli pipeline: prepare, mine, validate, build, apply, evaluate") {
    REQUIRE(!cli_bin().empty());
    const auto dir = tmp_dir();
    const auto tiny = data_dir() + "/tiny.csv";

    REQUIRE(run_cli("prepare --input " + tiny + " --output " + dir + "/data.json --vocab-out " +
                    dir + "/vocab.json") == 0);
    REQUIRE(run_cli("mine --input " + dir + "/data.json --output " + dir +
                    "/rules.jsonl --stats-out " + dir + "/stats.json --theta 0.1 --lambda 0.7") ==
            0);

    auto stats = ordered_json::parse(read_text(dir + "/stats.json"));
    REQUIRE(stats.at("rule_count").get<std::size_t>() > 0);
    REQUIRE(stats.contains("wall_time_seconds"));

    REQUIRE(run_cli("validate --rules " + dir + "/rules.jsonl --input " + dir +
                    "/data.json --output " + dir + "/valid.jsonl --lambda-valid 0.7") == 0);
    REQUIRE(run_cli("build --rules " + dir + "/valid.jsonl --input " + dir +
                    "/data.json --output " + dir + "/model.jsonl --model crs") == 0);
    REQUIRE(run_cli("apply --model " + dir + "/model.jsonl --input " + dir +
                    "/data.json --output " + dir + "/corrected.json") == 0);
    REQUIRE(run_cli("evaluate --input " + dir + "/data.json --model " + dir +
                    "/model.jsonl --output " + dir + "/metrics.json") == 0);

    auto metrics = ordered_json::parse(read_text(dir + "/metrics.json"));
    auto raw_rc = run_cli("evaluate --input " + dir + "/data.json --output " + dir +
                          "/metrics_raw.json");
    REQUIRE(raw_rc == 0);
    auto raw = ordered_json::parse(read_text(dir + "/metrics_raw.json"));
    REQUIRE(metrics.at("accuracy").get<double>() >= raw.at("accuracy").get<double>());
}

TEST_CASE("cli exit codes: usage 1, data error 2") {
    REQUIRE(!cli_bin().empty());
    const auto dir = tmp_dir();
    REQUIRE(run_cli("mine --bogus-flag") == 1);
    REQUIRE(run_cli("mine --input " + dir + "/missing.json --output " + dir + "/out.jsonl") == 2);
}

TEST_CASE("cli rejects rules built from a different vocabulary") {
    REQUIRE(!cli_bin().empty());
    const auto dir = tmp_dir();
    const auto tiny = data_dir() + "/tiny.csv";

    REQUIRE(run_cli("prepare --input " + tiny + " --output " + dir + "/a.json") == 0);
    REQUIRE(run_cli("prepare --input " + tiny + " --output " + dir + "/b.json --bins 3") == 0);
    REQUIRE(run_cli("mine --input " + dir + "/a.json --output " + dir + "/rules.jsonl") == 0);
    REQUIRE(run_cli("apply --model " + dir + "/rules.jsonl --input " + dir + "/b.json --output " +
                    dir + "/x.json") == 2);
}

TEST_CASE("cli mine is deterministic across prune flag and workers") {
    REQUIRE(!cli_bin().empty());
    const auto dir = tmp_dir();
    const auto tiny = data_dir() + "/tiny.csv";
    REQUIRE(run_cli("prepare --input " + tiny + " --output " + dir + "/data.json") == 0);

    REQUIRE(run_cli("mine --input " + dir + "/data.json --output " + dir + "/r1.jsonl") == 0);
    REQUIRE(run_cli("mine --input " + dir + "/data.json --output " + dir +
                    "/r2.jsonl --no-prune") == 0);
    REQUIRE(run_cli("mine --input " + dir + "/data.json --output " + dir +
                    "/r3.jsonl --workers 4") == 0);

    const auto r1 = read_text(dir + "/r1.jsonl");
    REQUIRE(r1 == read_text(dir + "/r2.jsonl"));
    REQUIRE(r1 == read_text(dir + "/r3.jsonl"));
}

TEST_CASE("cli gen-scenario planted writes dataset and manifest") {
    REQUIRE(!cli_bin().empty());
    const auto dir = tmp_dir();
    REQUIRE(run_cli("gen-scenario --kind planted --output-dir " + dir +
                    " --seed 5 --n-instances 300 --n-items 10 --planted-items 0,1") == 0);
    auto file = load_dataset(dir + "/dataset.json");
    REQUIRE(file.data.size() == 300);
    auto manifest = ordered_json::parse(read_text(dir + "/manifest.json"));
    REQUIRE(manifest.at("planted_items").get<std::vector<int>>() == std::vector<int>{0, 1});
}
