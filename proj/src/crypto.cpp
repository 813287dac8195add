#include "hashgraph/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <stdexcept>

namespace hashgraph {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void append_u64(Bytes& out, std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

template <class Tag>
std::string Bytes32<Tag>::hex() const
{
    std::string s;
    s.reserve(2 * kDigestSize);
    for (auto b : bytes) {
        s.push_back(kHexDigits[b >> 4]);
        s.push_back(kHexDigits[b & 0x0f]);
    }
    return s;
}

template <class Tag>
Bytes32<Tag> Bytes32<Tag>::from_hex(std::string_view hex)
{
    if (hex.size() != 2 * kDigestSize) throw std::invalid_argument("expected 64 hex characters");
    Bytes32 out;
    for (std::size_t i = 0; i < kDigestSize; ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex character");
        out.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

template struct Bytes32<DigestTag>;
template struct Bytes32<SignatureTag>;

Digest hash_bytes(std::span<const std::uint8_t> data)
{
    Digest d;
    SHA256(data.data(), data.size(), d.bytes.data());
    return d;
}

Signature sign(const KeyPair& key, std::span<const std::uint8_t> message)
{
    Signature sig;
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.secret.data(), static_cast<int>(key.secret.size()), message.data(),
         message.size(), sig.bytes.data(), &len);
    if (len != kDigestSize) throw std::runtime_error("unexpected HMAC length");
    return sig;
}

bool middle_bit(const Signature& sig) noexcept
{
    constexpr std::size_t bit = 8 * kDigestSize / 2;
    return ((sig.bytes[bit / 8] >> (7 - bit % 8)) & 1U) != 0;
}

Pki::Pki(std::uint32_t n, std::uint64_t seed) : seed_(seed)
{
    keys_.reserve(n);
    for (PartyId p = 0; p < n; ++p) {
        Bytes material{'h', 'g', '-', 's', 'k'};
        append_u64(material, seed);
        append_u64(material, p);
        const Digest secret = hash_bytes(material);

        KeyPair kp;
        kp.party = p;
        kp.secret.assign(secret.bytes.begin(), secret.bytes.end());
        Bytes pub_material{'h', 'g', '-', 'p', 'k'};
        pub_material.insert(pub_material.end(), kp.secret.begin(), kp.secret.end());
        const Digest pub = hash_bytes(pub_material);
        kp.public_key.assign(pub.bytes.begin(), pub.bytes.end());
        keys_.push_back(std::move(kp));
    }
}

bool Pki::verify(const Bytes& public_key, std::span<const std::uint8_t> message,
                 const Signature& sig) const
{
    for (const auto& k : keys_)
        if (k.public_key == public_key) return sign(k, message) == sig;
    return false;
}

bool Pki::verify(PartyId party, std::span<const std::uint8_t> message, const Signature& sig) const
{
    if (party >= keys_.size()) return false;
    return sign(keys_[party], message) == sig;
}

}  // namespace hashgraph
