#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace hashgraph {

// Growable bitset over dense event indices. Bits past the stored words read
// as zero, so sets built at different graph sizes can be combined directly.
class DynamicBitset {
public:
    DynamicBitset() = default;

    void set(std::size_t i)
    {
        const std::size_t w = i / 64;
        if (w >= words_.size()) words_.resize(w + 1, 0);
        words_[w] |= std::uint64_t{1} << (i % 64);
    }

    [[nodiscard]] bool test(std::size_t i) const noexcept
    {
        const std::size_t w = i / 64;
        return w < words_.size() && ((words_[w] >> (i % 64)) & 1U) != 0;
    }

    DynamicBitset& operator|=(const DynamicBitset& other)
    {
        if (other.words_.size() > words_.size()) words_.resize(other.words_.size(), 0);
        for (std::size_t w = 0; w < other.words_.size(); ++w) words_[w] |= other.words_[w];
        return *this;
    }

    DynamicBitset& operator&=(const DynamicBitset& other)
    {
        if (words_.size() > other.words_.size()) words_.resize(other.words_.size());
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
        return *this;
    }

    // Clears every bit that is set in `other`.
    DynamicBitset& subtract(const DynamicBitset& other)
    {
        const std::size_t m = std::min(words_.size(), other.words_.size());
        for (std::size_t w = 0; w < m; ++w) words_[w] &= ~other.words_[w];
        return *this;
    }

    [[nodiscard]] std::size_t count() const noexcept
    {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    [[nodiscard]] bool none() const noexcept
    {
        for (auto w : words_)
            if (w != 0) return false;
        return true;
    }

    template <class F>
    void for_each(F&& f) const
    {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                const int b = std::countr_zero(bits);
                f(w * 64 + static_cast<std::size_t>(b));
                bits &= bits - 1;
            }
        }
    }

private:
    std::vector<std::uint64_t> words_;
};

}  // namespace hashgraph
