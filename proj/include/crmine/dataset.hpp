#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "crmine/bitset.hpp"
#include "crmine/numeric.hpp"

namespace crmine {

enum class ScoreTransform { Identity, Tanh };

// Maps a raw classifier score into (-1, 1). Identity mode requires the input
// to already be in range; tanh mode accepts any real. tanh saturating to
// exactly +-1 is nudged back inside the open interval.
inline double transform_score(double raw, ScoreTransform mode) {
    if (mode == ScoreTransform::Identity) {
        if (!(raw > -1.0 && raw < 1.0))
            throw DataError("identity score transform requires raw score in (-1,1), got " +
                            format_double17(raw));
        return raw;
    }
    double s = std::tanh(raw);
    if (s >= 1.0) s = 1.0 - 1e-12;
    if (s <= -1.0) s = -1.0 + 1e-12;
    return s;
}

enum class Partition : std::uint8_t { TruePos = 0, FalsePos = 1, TrueNeg = 2, FalseNeg = 3 };

inline Partition classify_outcome(double score, int label) {
    const int pred = predicted_label(score);
    if (pred == 1) return label == 1 ? Partition::TruePos : Partition::FalsePos;
    return label == -1 ? Partition::TrueNeg : Partition::FalseNeg;
}

struct Instance {
    ItemBitset items;
    double score = 0.0;
    int label = 0; // -1 or 1
};

// Instances plus the four prediction-outcome partitions (index lists).
struct Dataset {
    std::vector<Instance> instances;
    std::array<std::vector<std::uint32_t>, 4> partitions;

    std::size_t size() const { return instances.size(); }

    const std::vector<std::uint32_t>& part(Partition p) const {
        return partitions[static_cast<std::size_t>(p)];
    }

    void rebuild_partitions() {
        for (auto& p : partitions) p.clear();
        for (std::size_t i = 0; i < instances.size(); ++i) {
            auto p = classify_outcome(instances[i].score, instances[i].label);
            partitions[static_cast<std::size_t>(p)].push_back(static_cast<std::uint32_t>(i));
        }
    }

    Dataset subset(const std::vector<std::uint32_t>& idx) const {
        Dataset out;
        out.instances.reserve(idx.size());
        for (auto i : idx) out.instances.push_back(instances[i]);
        out.rebuild_partitions();
        return out;
    }
};

} // namespace crmine
