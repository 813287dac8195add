#pragma once

#include "hashgraph/hashgraph.hpp"

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace hashgraph::consensus {

// Every c-th election round is a coin round. c >= 2 keeps the first
// election round (distance 1) a sight vote.
class CoinPeriod {
public:
    static constexpr int kDefault = 10;

    explicit CoinPeriod(int c = kDefault);
    [[nodiscard]] int value() const noexcept { return c_; }
    [[nodiscard]] bool is_coin_round(int distance) const noexcept { return distance % c_ == 0; }

private:
    int c_;
};

/// Smallest count strictly greater than 2n/3.
constexpr std::uint32_t quorum(std::uint32_t n) noexcept { return 2 * n / 3 + 1; }
constexpr bool is_supermajority(std::size_t count, std::uint32_t n) noexcept { return 3 * count > 2 * std::size_t{n}; }

struct RoundAssignment {
    int round;
    bool is_witness;
};

/// Round of `x` from its parents' rounds: one past the parents' maximum when x
/// strongly sees witnesses of that round from more than 2n/3 creators.
RoundAssignment assign_round(const Hashgraph& h, std::uint32_t x);
RoundAssignment assign_round(const Hashgraph& h, const EventId& x);

struct Vote {
    bool value = false;
    bool decided = false;  // the voter observed a supermajority in a normal round
};

/// Vote cast by witness `voter` in the election on witness `target`.
/// Requires voter.round > target.round. Memoized inside the graph.
Vote vote(Hashgraph& h, std::uint32_t target, std::uint32_t voter, CoinPeriod c);

/// Round-(r-1) witnesses that witness `y` (of round r) strongly sees.
const std::vector<std::uint32_t>& strongly_seen_previous_witnesses(Hashgraph& h, std::uint32_t y);

struct FameDecision {
    EventId event;
    std::uint32_t index;
    Fame fame;
    int round;          // round of the decided witness
    int decided_round;  // round of the witness whose tally decided it
};

/// Runs the virtual election for every undecided witness, earliest rounds
/// first. Returns only newly decided witnesses; re-running is idempotent.
std::vector<FameDecision> decide_fame(Hashgraph& h, CoinPeriod c);

/// Famous round-r witnesses whose creator has no other famous witness in r.
std::vector<std::uint32_t> unique_famous_witnesses(const Hashgraph& h, int r);

struct CommitEntry {
    EventId event;
    int round_received = 0;
    std::int64_t consensus_timestamp = 0;
    Signature whitened;

    [[nodiscard]] auto key() const { return std::tie(round_received, consensus_timestamp, whitened); }
};

/// Lower median of a non-empty sample.
std::int64_t lower_median(std::vector<std::int64_t> values);

/// Assigns roundReceived, consensus timestamp and whitened signature to every
/// event that becomes orderable, and returns them sorted by the total order
/// key (roundReceived, timestamp, whitened signature).
std::vector<CommitEntry> find_order(Hashgraph& h);

/// Rounds for which every witness was decided but no unique famous witness
/// existed. No event is ever received in such a round.
std::vector<int> skipped_rounds(const Hashgraph& h);

struct OrderViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// A party's totally ordered output. Append-only; keys strictly increase.
class CommitLog {
public:
    /// Appends one find_order batch. Throws OrderViolation when an entry does
    /// not strictly follow the current tail.
    void commit(const std::vector<CommitEntry>& batch, const Hashgraph& h);

    [[nodiscard]] const std::vector<CommitEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] const std::vector<Bytes>& transactions() const noexcept { return transactions_; }

private:
    std::vector<CommitEntry> entries_;
    std::vector<Bytes> transactions_;
};

}  // namespace hashgraph::consensus
