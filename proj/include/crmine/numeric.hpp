#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace crmine {

// Predicted class label: positive iff the score is strictly positive.
inline int predicted_label(double score) {
    return score > 0.0 ? 1 : -1;
}

// Shared convention for all threshold checks of the form num/den >= t.
// Evaluated as num >= t*den so that every code path (miner, filters,
// brute-force checks) agrees bit for bit. A zero denominator means the
// ratio is taken as 0.
inline bool ratio_ge(std::int64_t num, std::int64_t den, double threshold) {
    if (den == 0) return 0.0 >= threshold;
    return static_cast<double>(num) >= threshold * static_cast<double>(den);
}

inline double safe_ratio(std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// 17 significant digits: enough to reproduce any double exactly on re-parse.
inline std::string format_double17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace crmine
