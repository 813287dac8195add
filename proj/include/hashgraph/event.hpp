#pragma once

#include "hashgraph/crypto.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace hashgraph {

using EventId = Digest;

struct Event {
    PartyId creator = 0;
    std::int64_t timestamp = 0;
    std::vector<Bytes> transactions;
    std::optional<EventId> self_parent;
    std::optional<EventId> other_parent;
    Signature signature;

    [[nodiscard]] bool is_genesis() const noexcept { return !self_parent && !other_parent; }

    friend bool operator==(const Event&, const Event&) = default;
};

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kEncodingVersion = 0x01;
inline constexpr std::uint8_t kSelfParentFlag = 0x01;
inline constexpr std::uint8_t kOtherParentFlag = 0x02;

// Wire layout, all integers big-endian:
//   version(1) creator(4) timestamp(8) tx_count(4) {len(4) bytes}*
//   parent_flags(1) [self_parent(32)] [other_parent(32)] signature(32)
// A parent digest is written only when its flag bit is set.
Bytes encode(const Event& e);

/// The signed portion: the full encoding minus the trailing signature.
Bytes signing_bytes(const Event& e);

Event decode(std::span<const std::uint8_t> bytes);

/// Digest over the full encoding, signature included.
EventId event_id(const Event& e);

/// Fills in the signature with the creator's key.
Event signed_event(Event e, const KeyPair& key);

using EventRef = std::shared_ptr<const Event>;

}  // namespace hashgraph
