#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "crmine/numeric.hpp"

namespace crmine {

enum class ItemOp : std::uint8_t { Less, GreaterEq, Eq, Neq };

inline const char* item_op_name(ItemOp op) {
    switch (op) {
        case ItemOp::Less: return "<";
        case ItemOp::GreaterEq: return ">=";
        case ItemOp::Eq: return "=";
        case ItemOp::Neq: return "!=";
    }
    return "?";
}

inline ItemOp item_op_from_name(const std::string& s) {
    if (s == "<") return ItemOp::Less;
    if (s == ">=") return ItemOp::GreaterEq;
    if (s == "=") return ItemOp::Eq;
    if (s == "!=") return ItemOp::Neq;
    throw DataError("unknown item operator: " + s);
}

// One discretized predicate over a single attribute, e.g. "age < 30" or
// "occupation = teacher". Numeric ops carry a double threshold, categorical
// ops a category string.
struct Item {
    std::uint32_t id = 0;
    std::string attribute;
    ItemOp op = ItemOp::Eq;
    std::variant<double, std::string> value;

    bool numeric() const { return op == ItemOp::Less || op == ItemOp::GreaterEq; }

    double threshold() const { return std::get<double>(value); }
    const std::string& category() const { return std::get<std::string>(value); }

    std::string describe() const {
        std::string v = numeric() ? format_double17(threshold()) : category();
        return attribute + " " + item_op_name(op) + " " + v;
    }
};

struct ItemVocabulary {
    std::vector<Item> items;
    // Original id -> mining order. Identity unless a caller installs a
    // frequency-based reorder; the miner keeps its own per-direction copy.
    std::vector<std::uint32_t> order_permutation;

    std::size_t size() const { return items.size(); }

    void reset_order() {
        order_permutation.resize(items.size());
        for (std::size_t i = 0; i < items.size(); ++i)
            order_permutation[i] = static_cast<std::uint32_t>(i);
    }

    // Content digest over the item list; embedded in dataset and rule files
    // so stale pairings are caught at load time.
    std::uint64_t fingerprint() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 1099511628211ull;
            }
            h ^= 0x1f;
            h *= 1099511628211ull;
        };
        for (const auto& it : items) {
            mix(it.attribute);
            mix(item_op_name(it.op));
            mix(it.numeric() ? format_double17(it.threshold()) : it.category());
        }
        return h;
    }
};

// Per-attribute discretization recipe learned from a table.
struct AttributeSpec {
    std::string name;
    bool numeric = false;
    std::vector<double> cuts;            // strictly increasing, numeric only
    std::vector<std::string> categories; // sorted, categorical only
};

struct DiscretizationSpec {
    std::vector<AttributeSpec> attributes;
    int bins = 4;
    bool emit_neq = false; // also emit "!=" items for categorical attributes
};

} // namespace crmine
