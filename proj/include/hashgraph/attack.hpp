#pragma once

#include "hashgraph/simnet.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hashgraph::attack {

struct PreconditionViolated : std::logic_error {
    using std::logic_error::logic_error;
};

// The construction lost control of the seeing relation it relies on.
struct ConstructionFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kMinParties = 7;

struct AttackLabeling {
    std::vector<PartyId> perm;  // perm[label - 1] is the party with that label
    std::uint32_t cv = 0;       // labels 1..cv voted v
    bool v = false;

    [[nodiscard]] PartyId party(std::uint32_t label) const { return perm.at(label - 1); }
};

enum class Phase { Zig, LowerZag, UpperZag, Zag, FixVotes, MakeWitnesses, CoinRound, Decided };

const char* to_string(Phase p) noexcept;

// State after the witnesses of `round` have been built.
struct AttackPhase {
    Phase phase = Phase::MakeWitnesses;
    EventId target;
    int target_round = 0;
    int round = 0;
    std::map<std::string, EventId> anchors;  // A, B, C, D and the construction cursors
    AttackLabeling labeling;
    std::vector<EventId> witnesses;  // per party, its witness of `round`
    std::vector<bool> votes;         // per party, that witness's vote on the target
    bool coin = false;

    [[nodiscard]] std::uint32_t yes() const;
    [[nodiscard]] std::uint32_t no() const { return static_cast<std::uint32_t>(votes.size()) - yes(); }
};

struct DelayStats {
    EventId target;
    int target_round = 0;
    int rounds_elapsed = 0;
    int coin_rounds_elapsed = 0;
    std::optional<int> decided_at;  // round of the witness whose tally decided the target
    std::optional<int> supermajority_round;  // coin round whose votes reached a quorum
    std::optional<Fame> fame;
    std::vector<std::uint32_t> per_coin_round_yes_counts;
    // first round built from a split no quorum could keep; votes may move from there on
    std::optional<int> control_lost_round;
    std::vector<std::string> failures;  // broken attack invariants, empty when all held

    /// Rounds from the supermajority coin round to the decision.
    [[nodiscard]] std::optional<int> overhead() const;
};

/// Builds round r+1 from a fresh execution whose target `x` is a round-r
/// witness, splitting the votes floor(n/2) yes against the rest.
AttackPhase run_base_case(sim::Simulation& sim, EventId x);

/// Builds the next round so that every party's witness votes like its
/// previous one. Also used for coin rounds, where it still controls who sees
/// whom while the votes come from the coin.
AttackPhase run_inductive_step(sim::Simulation& sim, const AttackPhase& prev);

/// Alternates inductive steps until a coin round produces a quorum for one
/// value, then hands over to a fair scheduler until every honest party has
/// decided the target. Stops undecided after `max_rounds` rounds.
DelayStats run_delay_attack(sim::Simulation& sim, EventId x, int max_rounds);

/// Whether some quorum of the given witnesses has a majority for the minority
/// value, which the inductive step needs to keep the minority's votes. Always
/// true for n = 7 under the inductive hypothesis, not for every n.
bool minority_quorum_exists(const std::vector<bool>& votes);

/// Party ids in vote order: v voters ascending, then the rest ascending.
AttackLabeling label_by_votes(const std::vector<bool>& votes);

/// Votes of each party's `round` witness on `x`, computed over the union of
/// all created events. Throws ConstructionFailed unless the round has exactly
/// one witness per party.
std::vector<bool> witness_votes(sim::Simulation& sim, const EventId& x, int round, std::vector<EventId>* witnesses = nullptr);

/// Pairs of distinct same-round witnesses where one sees the other.
std::vector<std::pair<EventId, EventId>> mutual_sightings(const Hashgraph& h, int round);

inline constexpr const char* kStatsHeader =
    "seed,n,coinPeriod,targetRound,roundsElapsed,coinRoundsElapsed,decidedAt,supermajorityRound,overhead,controlLostRound,fame,yesCounts";

std::string stats_csv_row(std::uint64_t seed, std::uint32_t n, int coin_period, const DelayStats& s);

}  // namespace hashgraph::attack
