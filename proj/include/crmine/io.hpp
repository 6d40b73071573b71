#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "crmine/dataset.hpp"
#include "crmine/items.hpp"
#include "crmine/models.hpp"
#include "crmine/numeric.hpp"
#include "crmine/rules.hpp"
#include "crmine/scenario.hpp"

namespace crmine {

using ordered_json = nlohmann::ordered_json;

inline std::string fingerprint_hex(const ItemVocabulary& vocab) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(vocab.fingerprint()));
    return buf;
}

// Write-to-temp-then-rename so readers never observe a partial file.
inline void save_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + tmp);
        out << content;
        if (!out) throw DataError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot rename " + tmp + " to " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Vocabulary + discretization spec

inline ordered_json item_to_json(const Item& it) {
    ordered_json o;
    o["attr"] = it.attribute;
    o["op"] = item_op_name(it.op);
    if (it.numeric())
        o["value"] = it.threshold();
    else
        o["value"] = it.category();
    return o;
}

inline ordered_json vocab_to_json(const DiscretizationSpec& spec, const ItemVocabulary& vocab) {
    ordered_json o;
    o["fingerprint"] = fingerprint_hex(vocab);
    o["bins"] = spec.bins;
    o["emit_neq"] = spec.emit_neq;
    o["attributes"] = ordered_json::array();
    for (const auto& a : spec.attributes) {
        ordered_json ao;
        ao["name"] = a.name;
        ao["kind"] = a.numeric ? "numeric" : "categorical";
        if (a.numeric)
            ao["cuts"] = a.cuts;
        else
            ao["categories"] = a.categories;
        o["attributes"].push_back(ao);
    }
    o["items"] = ordered_json::array();
    for (const auto& it : vocab.items) o["items"].push_back(item_to_json(it));
    return o;
}

inline std::pair<DiscretizationSpec, ItemVocabulary> vocab_from_json(const ordered_json& o) {
    DiscretizationSpec spec;
    spec.bins = o.value("bins", 4);
    spec.emit_neq = o.value("emit_neq", false);
    for (const auto& ao : o.at("attributes")) {
        AttributeSpec a;
        a.name = ao.at("name").get<std::string>();
        a.numeric = ao.at("kind").get<std::string>() == "numeric";
        if (a.numeric)
            a.cuts = ao.at("cuts").get<std::vector<double>>();
        else
            a.categories = ao.at("categories").get<std::vector<std::string>>();
        spec.attributes.push_back(std::move(a));
    }
    ItemVocabulary vocab = build_vocabulary(spec);
    if (o.contains("fingerprint") &&
        o.at("fingerprint").get<std::string>() != fingerprint_hex(vocab))
        throw DataError("vocabulary file fingerprint does not match its own items");
    return {std::move(spec), std::move(vocab)};
}

// ---------------------------------------------------------------------------
// Dataset files

inline ordered_json dataset_to_json(const Dataset& ds, const DiscretizationSpec& spec,
                                    const ItemVocabulary& vocab) {
    ordered_json o;
    o["vocabulary"] = vocab_to_json(spec, vocab);
    o["instances"] = ordered_json::array();
    for (const auto& inst : ds.instances) {
        ordered_json io;
        io["items"] = inst.items.to_ids();
        io["score"] = inst.score;
        io["label"] = inst.label;
        o["instances"].push_back(std::move(io));
    }
    return o;
}

struct DatasetFile {
    Dataset data;
    DiscretizationSpec spec;
    ItemVocabulary vocab;
};

// Scores in (-2,2) are accepted: files written by `apply` carry corrected
// scores, and only the sign drives the predicted label.
inline DatasetFile dataset_from_json(const ordered_json& o) {
    DatasetFile f;
    auto [spec, vocab] = vocab_from_json(o.at("vocabulary"));
    f.spec = std::move(spec);
    f.vocab = std::move(vocab);
    const std::size_t n_items = f.vocab.size();
    for (const auto& io : o.at("instances")) {
        Instance inst;
        inst.items = ItemBitset(n_items);
        for (const auto& id : io.at("items")) {
            const auto v = id.get<std::uint64_t>();
            if (v >= n_items) throw DataError("instance references unknown item id");
            inst.items.set(v);
        }
        inst.score = io.at("score").get<double>();
        if (!(inst.score > -2.0 && inst.score < 2.0))
            throw DataError("instance score out of range: " + format_double17(inst.score));
        inst.label = io.at("label").get<int>();
        if (inst.label != 1 && inst.label != -1) throw DataError("instance label must be -1 or 1");
        f.data.instances.push_back(std::move(inst));
    }
    f.data.rebuild_partitions();
    return f;
}

inline void save_dataset(const std::string& path, const Dataset& ds,
                         const DiscretizationSpec& spec, const ItemVocabulary& vocab) {
    save_text_atomic(path, dataset_to_json(ds, spec, vocab).dump() + "\n");
}

inline DatasetFile load_dataset(const std::string& path) {
    return dataset_from_json(ordered_json::parse(read_text(path)));
}

// ---------------------------------------------------------------------------
// Rule files: one JSON object per line. The first line is a header with the
// vocabulary fingerprint (and the model kind for CRL/CRS files). Deltas and
// statistics are printed with 17 significant digits so re-parsing is exact.

inline std::string rule_to_json_line(const CorrectionRule& rule, const ItemVocabulary& vocab) {
    std::string s = "{\"items\":[";
    bool first = true;
    for (auto id : rule.itemset.to_ids()) {
        if (!first) s += ",";
        first = false;
        s += item_to_json(vocab.items[id]).dump();
    }
    s += "],\"delta\":" + format_double17(rule.delta);
    s += ",\"direction\":\"";
    s += direction_name(rule.direction);
    s += "\",\"support\":" + format_double17(rule.support);
    s += ",\"confidence\":" + format_double17(rule.confidence);
    s += ",\"n_true_changed\":" + std::to_string(rule.n_true_changed);
    s += ",\"n_false_changed\":" + std::to_string(rule.n_false_changed);
    s += "}";
    return s;
}

inline std::string rules_to_text(const std::vector<CorrectionRule>& rules,
                                 const ItemVocabulary& vocab,
                                 std::optional<ModelKind> model = std::nullopt) {
    std::string out = "{\"vocab_fingerprint\":\"" + fingerprint_hex(vocab) + "\"";
    if (model)
        out += std::string(",\"model\":\"") + (*model == ModelKind::RuleList ? "crl" : "crs") + "\"";
    out += "}\n";
    for (const auto& r : rules) out += rule_to_json_line(r, vocab) + "\n";
    return out;
}

inline void save_rules(const std::string& path, const std::vector<CorrectionRule>& rules,
                       const ItemVocabulary& vocab, std::optional<ModelKind> model = std::nullopt) {
    save_text_atomic(path, rules_to_text(rules, vocab, model));
}

struct RulesFile {
    std::vector<CorrectionRule> rules;
    std::string vocab_fingerprint;
    std::optional<ModelKind> model;
};

inline RulesFile parse_rules_text(const std::string& text, const ItemVocabulary& vocab) {
    std::unordered_map<std::string, std::uint32_t> lookup;
    for (const auto& it : vocab.items) {
        std::string key = it.attribute;
        key += '\x1f';
        key += item_op_name(it.op);
        key += '\x1f';
        key += it.numeric() ? format_double17(it.threshold()) : it.category();
        lookup[key] = it.id;
    }

    RulesFile out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto o = ordered_json::parse(line);
        if (first) {
            first = false;
            out.vocab_fingerprint = o.at("vocab_fingerprint").get<std::string>();
            if (out.vocab_fingerprint != fingerprint_hex(vocab))
                throw DataError("rules file was built against a different vocabulary (fingerprint " +
                                out.vocab_fingerprint + " vs " + fingerprint_hex(vocab) + ")");
            if (o.contains("model"))
                out.model = o.at("model").get<std::string>() == "crl" ? ModelKind::RuleList
                                                                      : ModelKind::RuleSet;
            continue;
        }
        CorrectionRule rule;
        rule.itemset = ItemBitset(vocab.size());
        for (const auto& io : o.at("items")) {
            std::string key = io.at("attr").get<std::string>();
            key += '\x1f';
            key += io.at("op").get<std::string>();
            key += '\x1f';
            if (io.at("value").is_number())
                key += format_double17(io.at("value").get<double>());
            else
                key += io.at("value").get<std::string>();
            auto it = lookup.find(key);
            if (it == lookup.end())
                throw DataError("rule references an item not in the vocabulary: " + io.dump());
            rule.itemset.set(it->second);
        }
        rule.delta = o.at("delta").get<double>();
        rule.direction = o.at("direction").get<std::string>() == "+" ? Direction::Positive
                                                                     : Direction::Negative;
        rule.support = o.at("support").get<double>();
        rule.confidence = o.at("confidence").get<double>();
        rule.n_true_changed = o.at("n_true_changed").get<std::int64_t>();
        rule.n_false_changed = o.at("n_false_changed").get<std::int64_t>();
        out.rules.push_back(std::move(rule));
    }
    if (first) throw DataError("rules file is empty (missing header line)");
    return out;
}

inline RulesFile load_rules(const std::string& path, const ItemVocabulary& vocab) {
    return parse_rules_text(read_text(path), vocab);
}

// ---------------------------------------------------------------------------
// Scenario manifest

inline ordered_json scenario_to_json(const DriftScenario& sc, const ItemVocabulary& vocab) {
    ordered_json o;
    o["kind"] = "drift";
    o["seed"] = sc.seed;
    o["regions"] = ordered_json::array();
    for (const auto& r : sc.regions) {
        ordered_json ro;
        ro["shifted_label"] = r.shifted_label;
        ro["conditions"] = ordered_json::array();
        for (const auto& c : r.conditions) {
            ordered_json co = item_to_json(vocab.items[c.item_id]);
            co["present"] = c.present;
            ro["conditions"].push_back(std::move(co));
        }
        ro["instances"] = r.hit_instances;
        o["regions"].push_back(std::move(ro));
    }
    o["splits"]["trn"] = sc.trn;
    o["splits"]["mng"] = sc.mng;
    o["splits"]["tst"] = sc.tst;
    return o;
}

inline ordered_json lack_splits_to_json(const LackSplits& splits, std::uint64_t seed) {
    ordered_json o;
    o["kind"] = "lack";
    o["seed"] = seed;
    o["splits"]["trn"] = splits.trn;
    o["splits"]["mng"] = splits.mng;
    o["splits"]["aug"] = splits.aug;
    o["splits"]["tst"] = splits.tst;
    return o;
}

} // namespace crmine
