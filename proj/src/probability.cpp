#include "hashgraph/probability.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hashgraph::attack {

namespace {

void check_range(std::uint32_t n)
{
    if (n < 1 || n > kMaxCoins) throw std::domain_error("coin count must be in [1, 62], got " + std::to_string(n));
}

}  // namespace

Ratio Ratio::reduced() const
{
    const std::uint64_t g = std::gcd(num, den);
    return g == 0 ? *this : Ratio{num / g, den / g};
}

bool operator==(const Ratio& a, const Ratio& b)
{
    const Ratio x = a.reduced();
    const Ratio y = b.reduced();
    return x.num == y.num && x.den == y.den;
}

std::uint64_t binomial(std::uint32_t n, std::uint32_t k)
{
    if (n > kMaxCoins) throw std::domain_error("binomial supports n <= 62");
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    // c * (n - i) / (i + 1) stays integral and below 2^63 for n <= 62
    for (std::uint32_t i = 0; i < k; ++i) c = c / (i + 1) * (n - i) + c % (i + 1) * (n - i) / (i + 1);
    return c;
}

Ratio exact_supermajority_prob(std::uint32_t n)
{
    check_range(n);
    std::uint64_t sum = 0;
    for (std::uint32_t k = 2 * n / 3 + 1; k <= n; ++k) sum += binomial(n, k);
    return {2 * sum, std::uint64_t{1} << n};
}

Ratio one_sided_tail(std::uint32_t n)
{
    check_range(n);
    std::uint64_t sum = 0;
    for (std::uint32_t k = (2 * n + 2) / 3; k <= n; ++k) sum += binomial(n, k);
    return {sum, std::uint64_t{1} << n};
}

double hoeffding_bound(std::uint32_t n)
{
    return std::exp(-static_cast<double>(n) / 18.0);
}

double expected_coin_rounds(std::uint32_t n)
{
    const Ratio p = exact_supermajority_prob(n);
    return static_cast<double>(p.den) / static_cast<double>(p.num);
}

}  // namespace hashgraph::attack
