#pragma once

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "crmine/dataset.hpp"
#include "crmine/items.hpp"
#include "crmine/table.hpp"

namespace crmine {

// Empirical quantile: value at index floor(p*n) of the ascending sample,
// clamped to the last element.
inline double empirical_quantile(const std::vector<double>& sorted, double p) {
    std::size_t idx = static_cast<std::size_t>(p * static_cast<double>(sorted.size()));
    if (idx >= sorted.size()) idx = sorted.size() - 1;
    return sorted[idx];
}

// Learns per-attribute discretization from the table: quantile cuts for
// numeric columns (2 items per cut), observed categories for the rest.
// A column is numeric iff every value parses as a number.
inline DiscretizationSpec fit_discretization(const RawTable& table, int bins = 4,
                                             bool emit_neq = false) {
    if (table.n_rows() == 0)
        throw DataError("fit_discretization requires a non-empty table");
    DiscretizationSpec spec;
    spec.bins = bins;
    spec.emit_neq = emit_neq;

    for (std::size_t a = 0; a < table.n_attributes(); ++a) {
        AttributeSpec attr;
        attr.name = table.attribute_names[a];

        std::vector<double> numeric_values;
        numeric_values.reserve(table.n_rows());
        bool all_numeric = true;
        for (const auto& row : table.cells) {
            auto v = parse_double(row[a]);
            if (!v) {
                all_numeric = false;
                break;
            }
            numeric_values.push_back(*v);
        }

        if (all_numeric) {
            attr.numeric = true;
            std::sort(numeric_values.begin(), numeric_values.end());
            std::vector<double> cuts;
            for (int b = 1; b < bins; ++b) {
                double c = empirical_quantile(numeric_values,
                                              static_cast<double>(b) / static_cast<double>(bins));
                if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
            }
            // A constant column yields no usable cut.
            if (cuts.size() == 1 && cuts[0] <= numeric_values.front() &&
                numeric_values.front() == numeric_values.back()) {
                cuts.clear();
            }
            if (cuts.empty())
                std::cerr << "warning: attribute '" << attr.name
                          << "' has no distinct quantile cuts; emitting no items\n";
            attr.cuts = std::move(cuts);
        } else {
            std::set<std::string> cats;
            for (const auto& row : table.cells) cats.insert(row[a]);
            attr.categories.assign(cats.begin(), cats.end());
        }
        spec.attributes.push_back(std::move(attr));
    }
    return spec;
}

// Vocabulary ids follow attribute order, then value order: per numeric cut,
// "attr < c" before "attr >= c"; per category, "=" before optional "!=".
inline ItemVocabulary build_vocabulary(const DiscretizationSpec& spec) {
    ItemVocabulary vocab;
    std::uint32_t id = 0;
    for (const auto& attr : spec.attributes) {
        if (attr.numeric) {
            for (double c : attr.cuts) {
                vocab.items.push_back({id++, attr.name, ItemOp::Less, c});
                vocab.items.push_back({id++, attr.name, ItemOp::GreaterEq, c});
            }
        } else {
            for (const auto& cat : attr.categories) {
                vocab.items.push_back({id++, attr.name, ItemOp::Eq, cat});
                if (spec.emit_neq)
                    vocab.items.push_back({id++, attr.name, ItemOp::Neq, cat});
            }
        }
    }
    vocab.reset_order();
    return vocab;
}

inline bool item_matches(const Item& item, bool attr_numeric, double num_value,
                         const std::string& str_value) {
    switch (item.op) {
        case ItemOp::Less: return attr_numeric && num_value < item.threshold();
        case ItemOp::GreaterEq: return attr_numeric && num_value >= item.threshold();
        case ItemOp::Eq: return !attr_numeric && str_value == item.category();
        case ItemOp::Neq: return !attr_numeric && str_value != item.category();
    }
    return false;
}

// Encodes each row into an instance whose bitset holds exactly the items the
// row satisfies. Unseen categories simply set no bit for that attribute.
inline Dataset encode(const RawTable& table, const DiscretizationSpec& spec,
                      const ItemVocabulary& vocab, ScoreTransform transform = ScoreTransform::Identity) {
    // Group item ids by attribute for a single pass per row.
    std::map<std::string, std::vector<std::uint32_t>> items_by_attr;
    for (const auto& it : vocab.items) items_by_attr[it.attribute].push_back(it.id);

    std::map<std::string, const AttributeSpec*> spec_by_name;
    for (const auto& a : spec.attributes) spec_by_name[a.name] = &a;

    Dataset ds;
    ds.instances.reserve(table.n_rows());
    std::size_t unseen = 0;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        Instance inst;
        inst.items = ItemBitset(vocab.size());
        inst.score = transform_score(table.scores[r], transform);
        inst.label = table.labels[r];

        for (std::size_t a = 0; a < table.n_attributes(); ++a) {
            const auto& name = table.attribute_names[a];
            auto sit = spec_by_name.find(name);
            if (sit == spec_by_name.end()) continue;
            const AttributeSpec& aspec = *sit->second;
            double num = 0.0;
            if (aspec.numeric) {
                auto v = parse_double(table.cells[r][a]);
                if (!v)
                    throw DataError("row " + std::to_string(r) + ": attribute '" + name +
                                    "' is numeric in the spec but value '" + table.cells[r][a] +
                                    "' does not parse");
                num = *v;
            } else {
                bool seen = std::binary_search(aspec.categories.begin(), aspec.categories.end(),
                                               table.cells[r][a]);
                if (!seen) ++unseen;
            }
            auto iit = items_by_attr.find(name);
            if (iit == items_by_attr.end()) continue;
            for (auto id : iit->second) {
                if (item_matches(vocab.items[id], aspec.numeric, num, table.cells[r][a]))
                    inst.items.set(id);
            }
        }
        ds.instances.push_back(std::move(inst));
    }
    if (unseen > 0)
        std::cerr << "warning: " << unseen << " categorical values unseen at fit time\n";
    ds.rebuild_partitions();
    return ds;
}

} // namespace crmine
