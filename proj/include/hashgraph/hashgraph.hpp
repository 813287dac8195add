#pragma once

#include "hashgraph/bitset.hpp"
#include "hashgraph/crypto.hpp"
#include "hashgraph/event.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <variant>
#include <vector>

namespace hashgraph {

namespace consensus {
struct Access;
}

enum class Fame : std::uint8_t { Undecided, Famous, NotFamous };

const char* to_string(Fame f) noexcept;

// Write-once metadata derived locally for each stored event.
struct DerivedMeta {
    int round = 0;  // 0 until assigned at insertion
    bool is_witness = false;
    Fame fame = Fame::Undecided;
    std::optional<int> round_received;
    std::optional<std::int64_t> consensus_timestamp;
};

enum class InsertStatus { Inserted, Duplicate, MissingParents, BadSignature, Malformed };

const char* to_string(InsertStatus s) noexcept;

struct InsertResult {
    InsertStatus status;
    EventId id;
    std::uint32_t index = 0;  // valid for Inserted and Duplicate
};

struct ForkPair {
    EventId left;
    EventId right;
};

struct UnknownEvent : std::out_of_range {
    explicit UnknownEvent(const EventId& id) : std::out_of_range("unknown event " + id.hex()) {}
};

struct Consistent {};
struct Divergent {
    EventId witness;
};
using Consistency = std::variant<Consistent, Divergent>;

// One party's view of the gossip DAG. Append-only and closed under ancestry:
// an event is accepted only once both of its parents are stored, so insertion
// order is a topological order. Rounds and witness flags are computed at
// insertion; fame and ordering metadata are filled in by the consensus
// procedures and never rewritten.
//
// Single writer. Reads are safe concurrently between insertions.
class Hashgraph {
public:
    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();
    static constexpr std::uint32_t kMaxParties = 64;

    // Maps an event to its identifier. Defaults to the digest of the canonical
    // encoding; tests substitute a colliding function to fabricate divergence.
    using IdFunction = std::function<EventId(const Event&)>;

    Hashgraph(std::shared_ptr<const Pki> pki, PartyId owner, IdFunction id_fn = {});

    [[nodiscard]] std::uint32_t n() const noexcept { return n_; }
    [[nodiscard]] PartyId owner() const noexcept { return owner_; }
    [[nodiscard]] const Pki& pki() const noexcept { return *pki_; }
    [[nodiscard]] std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(nodes_.size()); }

    InsertResult insert(EventRef e);
    InsertResult insert(const Event& e) { return insert(std::make_shared<const Event>(e)); }

    /// Identifier the graph would assign to `e`.
    [[nodiscard]] EventId id_of(const Event& e) const { return id_fn_(e); }

    [[nodiscard]] bool contains(const EventId& id) const { return index_.contains(id); }
    [[nodiscard]] std::optional<std::uint32_t> find(const EventId& id) const;
    [[nodiscard]] std::uint32_t index_of(const EventId& id) const;  // throws UnknownEvent

    [[nodiscard]] const EventId& id_at(std::uint32_t i) const { return nodes_[i].id; }
    [[nodiscard]] const Event& event_at(std::uint32_t i) const { return *nodes_[i].event; }
    [[nodiscard]] const EventRef& event_ref_at(std::uint32_t i) const { return nodes_[i].event; }
    [[nodiscard]] const DerivedMeta& meta_at(std::uint32_t i) const { return nodes_[i].meta; }
    [[nodiscard]] const Event& event(const EventId& id) const { return event_at(index_of(id)); }
    [[nodiscard]] const DerivedMeta& meta(const EventId& id) const { return meta_at(index_of(id)); }

    [[nodiscard]] std::uint32_t self_parent_at(std::uint32_t i) const { return nodes_[i].self_parent; }
    [[nodiscard]] std::uint32_t other_parent_at(std::uint32_t i) const { return nodes_[i].other_parent; }
    [[nodiscard]] PartyId creator_at(std::uint32_t i) const { return nodes_[i].event->creator; }
    [[nodiscard]] const DynamicBitset& ancestors_at(std::uint32_t i) const { return nodes_[i].ancestors; }

    /// Events by `c` in insertion order.
    [[nodiscard]] const std::vector<std::uint32_t>& by_creator(PartyId c) const { return by_creator_.at(c); }

    /// Witnesses of round `r`, ordered by (creator, id).
    [[nodiscard]] const std::vector<std::uint32_t>& witnesses(int r) const;
    [[nodiscard]] int max_round() const noexcept { return static_cast<int>(witnesses_.size()); }

    // Ancestry is reflexive: every event is its own ancestor and self-ancestor.
    [[nodiscard]] bool is_ancestor(std::uint32_t a, std::uint32_t d) const { return nodes_[d].ancestors.test(a); }
    [[nodiscard]] bool is_self_ancestor(std::uint32_t a, std::uint32_t d) const;
    [[nodiscard]] bool observes_fork(std::uint32_t x, PartyId c) const
    {
        return ((nodes_[x].forked_mask >> c) & 1U) != 0;
    }
    [[nodiscard]] bool sees(std::uint32_t x, std::uint32_t y) const
    {
        return is_ancestor(y, x) && !observes_fork(x, creator_at(y));
    }
    [[nodiscard]] bool strongly_sees(std::uint32_t x, std::uint32_t y) const;

    [[nodiscard]] bool is_ancestor(const EventId& a, const EventId& d) const { return is_ancestor(index_of(a), index_of(d)); }
    [[nodiscard]] bool is_self_ancestor(const EventId& a, const EventId& d) const
    {
        return is_self_ancestor(index_of(a), index_of(d));
    }
    [[nodiscard]] bool sees(const EventId& x, const EventId& y) const { return sees(index_of(x), index_of(y)); }
    [[nodiscard]] bool strongly_sees(const EventId& x, const EventId& y) const
    {
        return strongly_sees(index_of(x), index_of(y));
    }

    /// All unordered pairs of `c`'s events that are ancestry-incomparable.
    [[nodiscard]] std::vector<ForkPair> forks_by(PartyId c) const;

    /// Most recently inserted event created by `c`, if any.
    [[nodiscard]] std::optional<std::uint32_t> latest_by(PartyId c) const;

private:
    friend struct consensus::Access;

    struct VoteRecord {
        bool value = false;
        bool supermajority = false;  // tally of the strongly seen previous round exceeded 2n/3
    };

    struct Node {
        EventRef event;
        EventId id;
        std::uint32_t self_parent = npos;
        std::uint32_t other_parent = npos;
        std::uint32_t self_depth = 0;
        DerivedMeta meta;
        DynamicBitset ancestors;
        std::uint64_t forked_mask = 0;       // creators with an observed fork
        std::vector<std::uint32_t> top;      // highest ancestor by each creator
        // consensus scratch, derived from ancestors only
        std::optional<std::vector<std::uint32_t>> strongly_seen_prev;
        std::unordered_map<std::uint32_t, VoteRecord> votes;
        int decided_by_round = 0;
    };

    void link(Node& node) const;

    std::shared_ptr<const Pki> pki_;
    PartyId owner_;
    std::uint32_t n_;
    IdFunction id_fn_;
    std::vector<Node> nodes_;
    std::unordered_map<EventId, std::uint32_t, Bytes32Hash> index_;
    std::vector<std::vector<std::uint32_t>> by_creator_;
    std::vector<std::vector<std::uint32_t>> witnesses_;  // [round-1]

    // consensus bookkeeping
    int coin_period_ = 0;
    int ordered_through_round_ = 0;
    std::vector<int> skipped_rounds_;
    std::set<std::pair<int, std::uint32_t>> undecided_;  // (round, index) of undecided witnesses
    DynamicBitset received_;
    std::vector<std::uint32_t> fresh_witnesses_;  // inserted since the last fame pass
    std::uint32_t fame_frontier_ = 0;             // graph size at the last fame pass
};

/// Two hashgraphs are consistent iff every shared event has the same ancestor
/// subgraph in both. Identifiers are content digests, so it suffices that
/// every shared identifier maps to an identical event.
Consistency graph_consistent(const Hashgraph& a, const Hashgraph& b);

}  // namespace hashgraph
