#pragma once

#include "hashgraph/consensus.hpp"
#include "hashgraph/hashgraph.hpp"
#include "hashgraph/trace.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hashgraph::sim {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Stalled : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TxInjection {
    std::uint64_t step = 0;
    PartyId party = 0;
    Bytes tx;
};

struct SimConfig {
    std::uint32_t n = 4;
    std::vector<PartyId> corrupted;
    int coin_period = consensus::CoinPeriod::kDefault;
    std::uint64_t seed = 1;
    std::uint64_t max_steps = 100000;
    std::vector<TxInjection> tx_injection;

    /// Throws ConfigError unless 2 <= n <= 64, corrupted ids are distinct and
    /// in range, 3 * |corrupted| < n, and the coin period is at least 2.
    void validate() const;
    [[nodiscard]] bool is_corrupted(PartyId p) const;
};

/// Two transactions per honest party, spread over the first steps.
std::vector<TxInjection> default_tx_schedule(const SimConfig& cfg, std::uint32_t per_party = 2,
                                             std::uint64_t spacing = 5);

struct SyncEntry {
    EventId id;
    EventRef event;
};

struct SyncMessage {
    PartyId sender = 0;
    std::vector<SyncEntry> events;  // topological order, head last
    EventId head;
};

struct PendingDelivery {
    std::uint64_t id = 0;
    PartyId target = 0;
    std::uint64_t sent_step = 0;
    SyncMessage message;
};

struct PartyState {
    PartyId id = 0;
    bool corrupted = false;
    Hashgraph graph;
    std::vector<SyncEntry> buffer;  // events waiting for ancestors
    consensus::CommitLog log;
    std::deque<Bytes> pending_tx;
    std::int64_t clock_offset = 0;
    std::vector<std::uint32_t> tips;  // own branch heads; more than one only for forkers
    std::uint64_t dropped = 0;       // events rejected as malformed or badly signed

    PartyState(PartyId id, bool corrupted, std::shared_ptr<const Pki> pki, std::int64_t offset)
        : id(id), corrupted(corrupted), graph(std::move(pki), id), clock_offset(offset)
    {
    }
};

struct Action {
    enum class Kind {
        Deliver,  // deliver pending delivery `delivery`
        Sync,     // `from` syncs to `to`, queued as a pending delivery
        Forward,  // `to` receives the sync `event`'s creator made right after creating it
    };
    Kind kind = Kind::Sync;
    std::uint64_t delivery = 0;
    PartyId from = 0;
    PartyId to = 0;
    EventId event;

    static Action deliver(std::uint64_t id) { return {Kind::Deliver, id, 0, 0, {}}; }
    static Action sync(PartyId from, PartyId to) { return {Kind::Sync, 0, from, to, {}}; }
    static Action forward(PartyId to, const EventId& e) { return {Kind::Forward, 0, 0, to, e}; }
};

struct PrefixViolation {
    PartyId i = 0;
    PartyId j = 0;
    std::size_t index = 0;
};

/// First index where two logs disagree within the shorter length.
template <class T>
std::optional<std::size_t> first_divergence(const std::vector<T>& a, const std::vector<T>& b)
{
    const std::size_t m = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < m; ++k)
        if (!(a[k] == b[k])) return k;
    return std::nullopt;
}

/// Pairwise prefix check over committed-transaction logs; logs[i] belongs to ids[i].
std::optional<PrefixViolation> check_prefix_consistency(const std::vector<PartyId>& ids,
                                                        const std::vector<std::vector<Bytes>>& logs);
std::optional<PrefixViolation> check_prefix_consistency(const std::vector<PartyState>& parties);

// Incremental prefix check against the longest committed-event log seen so
// far. Each new entry is compared once, so checking after every step is
// linear in the total output.
class PrefixMonitor {
public:
    std::optional<PrefixViolation> update(PartyId p, const std::vector<consensus::CommitEntry>& log);

private:
    std::vector<EventId> reference_;
    std::vector<PartyId> owner_;
    std::unordered_map<PartyId, std::size_t> checked_;
};

class Simulation;

class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual Action next(const Simulation& sim) = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

// Deliveries in send order, interleaved with syncs between uniformly chosen
// parties. Every sync is eventually delivered.
class FairScheduler : public Scheduler {
public:
    explicit FairScheduler(std::uint64_t seed);
    Action next(const Simulation& sim) override;
    [[nodiscard]] std::string name() const override { return "fair"; }

private:
    std::mt19937_64 rng_;
};

// Delivers a uniformly random pending sync, so messages are reordered
// arbitrarily; a delivery older than `max_delay` steps is forced out first.
class RandomScheduler : public Scheduler {
public:
    explicit RandomScheduler(std::uint64_t seed, std::uint64_t max_delay = 64);
    Action next(const Simulation& sim) override;
    [[nodiscard]] std::string name() const override { return "random"; }

private:
    std::mt19937_64 rng_;
    std::uint64_t max_delay_;
};

struct SimOptions {
    bool record_trace = true;
    bool keep_observer = true;       // maintain the union of all created events
    double fork_probability = 0.25;  // per event created by a corrupted party
    std::string scheduler_name = "fair";
};

struct StepOutcome {
    std::vector<EventId> created;
    std::uint32_t inserted = 0;
};

struct RunResult {
    std::optional<PrefixViolation> violation;
    bool all_committed = false;
    std::uint64_t steps = 0;
};

class Simulation {
public:
    explicit Simulation(SimConfig cfg, SimOptions opts = {});

    [[nodiscard]] const SimConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const SimOptions& options() const noexcept { return opts_; }
    [[nodiscard]] std::uint32_t n() const noexcept { return cfg_.n; }
    [[nodiscard]] std::uint64_t step_count() const noexcept { return step_; }
    [[nodiscard]] consensus::CoinPeriod coin_period() const { return consensus::CoinPeriod(cfg_.coin_period); }
    [[nodiscard]] const std::shared_ptr<const Pki>& pki() const noexcept { return pki_; }

    [[nodiscard]] const std::vector<PartyState>& parties() const noexcept { return parties_; }
    [[nodiscard]] const PartyState& party(PartyId p) const { return parties_.at(p); }
    [[nodiscard]] std::vector<PartyId> honest() const;
    [[nodiscard]] const std::deque<PendingDelivery>& pending() const noexcept { return pending_; }

    /// Union of every created event, including both sides of any fork.
    [[nodiscard]] const Hashgraph& observer() const;
    Hashgraph& observer();

    [[nodiscard]] const Trace& trace() const noexcept { return trace_; }
    void record(TraceRecord r) { trace_.add(std::move(r)); }

    /// Sync content `from` would send now: all its events, or for a forker
    /// the ancestry of the branch it shows `to`.
    [[nodiscard]] SyncMessage initiate_sync(PartyId from, PartyId to) const;

    /// The sync `e`'s creator could have sent right after creating `e`.
    [[nodiscard]] SyncMessage snapshot_of(const EventId& e) const;

    /// Processes one received sync at `p` and returns the events `p` created.
    StepOutcome on_receive_sync(PartyId p, const SyncMessage& m);

    /// Applies one action as a full step: injections due now, the action,
    /// then the prefix check.
    StepOutcome apply(const Action& a);
    StepOutcome step(Scheduler& s) { return apply(s.next(*this)); }

    /// Delivers every pending sync in send order.
    void drain();

    /// Runs `steps` scheduler steps.
    RunResult run_for(Scheduler& s, std::uint64_t steps);

    /// Runs until every injected honest transaction is committed by every
    /// honest party and nothing is pending. Throws Stalled past max_steps.
    RunResult run_until_committed(Scheduler& s);

    [[nodiscard]] const std::optional<PrefixViolation>& violation() const noexcept { return violation_; }
    [[nodiscard]] bool all_injected_committed() const;
    [[nodiscard]] std::uint64_t honest_tx_injected() const noexcept { return honest_tx_.size(); }
    [[nodiscard]] MetricsRow metrics() const;

private:
    PartyState& mut(PartyId p) { return parties_.at(p); }
    void inject_due();
    EventId create_event(PartyState& p, std::optional<std::uint32_t> self_parent, std::optional<EventId> other_parent,
                         std::vector<Bytes> txs);
    std::uint32_t insert_entries(PartyState& p, const SyncMessage& m);
    void run_consensus(PartyState& p);
    void check_prefix(PartyId p);

    SimConfig cfg_;
    SimOptions opts_;
    std::shared_ptr<const Pki> pki_;
    std::vector<PartyState> parties_;
    std::optional<Hashgraph> observer_;
    std::deque<PendingDelivery> pending_;
    std::uint64_t next_delivery_ = 0;
    std::uint64_t step_ = 0;
    std::size_t next_injection_ = 0;
    std::vector<TxInjection> schedule_;  // sorted by step
    std::set<Bytes> honest_tx_;
    std::vector<std::set<Bytes>> committed_honest_;  // per party
    std::mt19937_64 byzantine_rng_;
    std::uint64_t fork_counter_ = 0;
    // creator and creator graph size right after each creation
    std::unordered_map<EventId, std::pair<PartyId, std::uint32_t>, Bytes32Hash> snapshots_;
    PrefixMonitor monitor_;
    std::optional<PrefixViolation> violation_;
    Trace trace_;
};

}  // namespace hashgraph::sim
