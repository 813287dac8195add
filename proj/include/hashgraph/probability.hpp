#pragma once

#include <cstdint>
#include <string>

namespace hashgraph::attack {

// Exact probabilities over n fair coins, kept with denominator 2^n.
struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    [[nodiscard]] double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    [[nodiscard]] std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
    [[nodiscard]] Ratio reduced() const;

    /// Equal as rational numbers.
    friend bool operator==(const Ratio& a, const Ratio& b);
};

inline constexpr std::uint32_t kMaxCoins = 62;

/// C(n, k), exact for n <= 62.
std::uint64_t binomial(std::uint32_t n, std::uint32_t k);

/// Probability that more than 2n/3 of n coins agree on either side:
/// 2 * sum_{k > 2n/3} C(n, k) / 2^n.
Ratio exact_supermajority_prob(std::uint32_t n);

/// Probability that at least ceil(2n/3) of n coins come up heads.
Ratio one_sided_tail(std::uint32_t n);

/// exp(-n/18), the Hoeffding bound on the one-sided tail.
double hoeffding_bound(std::uint32_t n);

/// Mean number of coin rounds until one has a supermajority.
double expected_coin_rounds(std::uint32_t n);

}  // namespace hashgraph::attack
