#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hashgraph {

using Bytes = std::vector<std::uint8_t>;
using PartyId = std::uint32_t;

inline constexpr std::size_t kDigestSize = 32;

// Fixed 32-byte value. The tag keeps digests and signatures from mixing.
template <class Tag>
struct Bytes32 {
    std::array<std::uint8_t, kDigestSize> bytes{};

    friend auto operator<=>(const Bytes32&, const Bytes32&) = default;

    [[nodiscard]] std::string hex() const;
    static Bytes32 from_hex(std::string_view hex);

    Bytes32& operator^=(const Bytes32& other) noexcept
    {
        for (std::size_t i = 0; i < kDigestSize; ++i) bytes[i] ^= other.bytes[i];
        return *this;
    }
};

struct DigestTag {};
struct SignatureTag {};
using Digest = Bytes32<DigestTag>;
using Signature = Bytes32<SignatureTag>;

struct Bytes32Hash {
    template <class Tag>
    std::size_t operator()(const Bytes32<Tag>& d) const noexcept
    {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | d.bytes[i];
        return h;
    }
};

struct KeyPair {
    PartyId party = 0;
    Bytes secret;
    Bytes public_key;
};

/// SHA-256 of the canonical bytes. Pure.
Digest hash_bytes(std::span<const std::uint8_t> data);

/// Deterministic simulated signature: HMAC-SHA256 keyed by the party secret.
Signature sign(const KeyPair& key, std::span<const std::uint8_t> message);

/// Bit floor(8L/2) of the signature, most-significant-first within each byte.
/// For 32-byte signatures this is the top bit of byte 16.
bool middle_bit(const Signature& sig) noexcept;

// Key directory for one execution: a fixed key pair per party, derived
// deterministically from the execution seed. Verification recomputes the
// keyed digest, so the directory plays the role of the trusted PKI.
class Pki {
public:
    Pki(std::uint32_t n, std::uint64_t seed);

    [[nodiscard]] std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(keys_.size()); }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] const KeyPair& key(PartyId p) const { return keys_.at(p); }

    [[nodiscard]] bool verify(const Bytes& public_key, std::span<const std::uint8_t> message,
                              const Signature& sig) const;
    [[nodiscard]] bool verify(PartyId party, std::span<const std::uint8_t> message,
                              const Signature& sig) const;

private:
    std::uint64_t seed_;
    std::vector<KeyPair> keys_;
};

}  // namespace hashgraph
