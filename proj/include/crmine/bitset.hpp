#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace crmine {

// Fixed-width dynamic bitset used for itemsets and instance transactions.
// Unused bits of the last word are always zero, so equality and hashing
// can work word-wise.
class ItemBitset {
public:
    ItemBitset() = default;

    explicit ItemBitset(std::size_t n_bits)
        : n_bits_(n_bits), words_((n_bits + 63) / 64, 0) {}

    static ItemBitset from_ids(std::size_t n_bits, const std::vector<std::uint32_t>& ids) {
        ItemBitset b(n_bits);
        for (auto id : ids) b.set(id);
        return b;
    }

    std::size_t size() const { return n_bits_; }

    void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }

    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    // True iff every bit of *this is also set in other.
    bool is_subset_of(const ItemBitset& other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return false;
        return true;
    }

    bool operator==(const ItemBitset& other) const {
        return n_bits_ == other.n_bits_ && words_ == other.words_;
    }
    bool operator!=(const ItemBitset& other) const { return !(*this == other); }

    std::vector<std::uint32_t> to_ids() const {
        std::vector<std::uint32_t> ids;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                int b = __builtin_ctzll(bits);
                ids.push_back(static_cast<std::uint32_t>(w * 64 + b));
                bits &= bits - 1;
            }
        }
        return ids;
    }

    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (auto w : words_) {
            h ^= w;
            h *= 1099511628211ull;
        }
        return h;
    }

    // Remap every set bit i to perm[i] (perm must be a bijection on ids).
    ItemBitset remapped(const std::vector<std::uint32_t>& perm) const {
        ItemBitset out(n_bits_);
        for (auto id : to_ids()) out.set(perm[id]);
        return out;
    }

private:
    std::size_t n_bits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Orders itemsets as their ascending id sequences compare lexicographically,
// e.g. {1} < {1,2} < {1,3} < {2}.
inline bool lex_less(const ItemBitset& a, const ItemBitset& b) {
    auto ia = a.to_ids();
    auto ib = b.to_ids();
    return ia < ib;
}

} // namespace crmine
