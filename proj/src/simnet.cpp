#include "hashgraph/simnet.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace hashgraph::sim {

namespace {

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t k) { return rng() % k; }

Action random_sync(std::mt19937_64& rng, std::uint32_t n)
{
    const auto from = static_cast<PartyId>(pick(rng, n));
    auto to = static_cast<PartyId>(pick(rng, n - 1));
    if (to >= from) ++to;
    return Action::sync(from, to);
}

}  // namespace

void SimConfig::validate() const
{
    if (n < 2 || n > Hashgraph::kMaxParties) throw ConfigError("n must be in [2, 64]");
    std::set<PartyId> seen;
    for (PartyId p : corrupted) {
        if (p >= n) throw ConfigError("corrupted party " + std::to_string(p) + " out of range");
        if (!seen.insert(p).second) throw ConfigError("corrupted party " + std::to_string(p) + " listed twice");
    }
    if (3 * corrupted.size() >= n)
        throw ConfigError("need 3t < n, got n=" + std::to_string(n) + " t=" + std::to_string(corrupted.size()));
    if (coin_period < 2) throw ConfigError("coin period must be at least 2");
    if (max_steps == 0) throw ConfigError("max steps must be positive");
    for (const auto& inj : tx_injection)
        if (inj.party >= n) throw ConfigError("transaction for unknown party " + std::to_string(inj.party));
}

bool SimConfig::is_corrupted(PartyId p) const
{
    return std::find(corrupted.begin(), corrupted.end(), p) != corrupted.end();
}

std::vector<TxInjection> default_tx_schedule(const SimConfig& cfg, std::uint32_t per_party, std::uint64_t spacing)
{
    std::vector<TxInjection> out;
    std::uint64_t k = 0;
    for (std::uint32_t i = 0; i < per_party; ++i) {
        for (PartyId p = 0; p < cfg.n; ++p) {
            if (cfg.is_corrupted(p)) continue;
            out.push_back({k * spacing, p, to_bytes("tx-" + std::to_string(p) + "-" + std::to_string(i))});
            ++k;
        }
    }
    return out;
}

std::optional<PrefixViolation> check_prefix_consistency(const std::vector<PartyId>& ids,
                                                        const std::vector<std::vector<Bytes>>& logs)
{
    for (std::size_t a = 0; a < logs.size(); ++a)
        for (std::size_t b = a + 1; b < logs.size(); ++b)
            if (auto k = first_divergence(logs[a], logs[b])) return PrefixViolation{ids[a], ids[b], *k};
    return std::nullopt;
}

std::optional<PrefixViolation> check_prefix_consistency(const std::vector<PartyState>& parties)
{
    std::vector<PartyId> ids;
    std::vector<std::vector<Bytes>> logs;
    for (const auto& p : parties) {
        if (p.corrupted) continue;
        ids.push_back(p.id);
        logs.push_back(p.log.transactions());
    }
    return check_prefix_consistency(ids, logs);
}

std::optional<PrefixViolation> PrefixMonitor::update(PartyId p, const std::vector<consensus::CommitEntry>& log)
{
    std::size_t& k = checked_[p];
    for (; k < log.size(); ++k) {
        if (k < reference_.size()) {
            if (reference_[k] != log[k].event) return PrefixViolation{p, owner_[k], k};
        } else {
            reference_.push_back(log[k].event);
            owner_.push_back(p);
        }
    }
    return std::nullopt;
}

FairScheduler::FairScheduler(std::uint64_t seed) : rng_(seed ^ 0x5FA1'5C4E'D000'0001ULL) {}

Action FairScheduler::next(const Simulation& sim)
{
    const auto& pending = sim.pending();
    if (!pending.empty() && (pending.size() > sim.n() || (rng_() & 1U) != 0))
        return Action::deliver(pending.front().id);
    return random_sync(rng_, sim.n());
}

RandomScheduler::RandomScheduler(std::uint64_t seed, std::uint64_t max_delay)
    : rng_(seed ^ 0x0ADE'5A41'0000'0002ULL), max_delay_(max_delay)
{
}

Action RandomScheduler::next(const Simulation& sim)
{
    const auto& pending = sim.pending();
    if (!pending.empty()) {
        if (sim.step_count() - pending.front().sent_step >= max_delay_) return Action::deliver(pending.front().id);
        if (pending.size() > 4 * std::size_t{sim.n()} || (rng_() & 1U) != 0)
            return Action::deliver(pending[pick(rng_, pending.size())].id);
    }
    return random_sync(rng_, sim.n());
}

Simulation::Simulation(SimConfig cfg, SimOptions opts)
    : cfg_(std::move(cfg)), opts_(std::move(opts)), trace_(opts_.record_trace)
{
    cfg_.validate();
    std::sort(cfg_.corrupted.begin(), cfg_.corrupted.end());
    pki_ = std::make_shared<const Pki>(cfg_.n, cfg_.seed);
    byzantine_rng_.seed(cfg_.seed ^ 0xB1A5'F0F0'0000'0003ULL);

    std::mt19937_64 clocks(cfg_.seed ^ 0xC10C'0000'0000'0004ULL);
    parties_.reserve(cfg_.n);
    for (PartyId p = 0; p < cfg_.n; ++p)
        parties_.emplace_back(p, cfg_.is_corrupted(p), pki_, static_cast<std::int64_t>(pick(clocks, 16)));
    if (opts_.keep_observer) observer_.emplace(pki_, 0);

    schedule_ = cfg_.tx_injection;
    std::stable_sort(schedule_.begin(), schedule_.end(),
                     [](const TxInjection& a, const TxInjection& b) { return a.step < b.step; });

    TraceRecord header;
    header.kind = RecordKind::Config;
    header.n = cfg_.n;
    header.corrupted = cfg_.corrupted;
    header.coin_period = cfg_.coin_period;
    header.seed = cfg_.seed;
    header.scheduler = opts_.scheduler_name;
    trace_.add(std::move(header));

    committed_honest_.resize(cfg_.n);
    for (auto& p : parties_) {
        const EventId g = create_event(p, std::nullopt, std::nullopt, {});
        p.tips = {p.graph.index_of(g)};
    }
}

std::vector<PartyId> Simulation::honest() const
{
    std::vector<PartyId> out;
    for (const auto& p : parties_)
        if (!p.corrupted) out.push_back(p.id);
    return out;
}

const Hashgraph& Simulation::observer() const
{
    if (!observer_) throw std::logic_error("observer graph disabled");
    return *observer_;
}

Hashgraph& Simulation::observer()
{
    if (!observer_) throw std::logic_error("observer graph disabled");
    return *observer_;
}

EventId Simulation::create_event(PartyState& p, std::optional<std::uint32_t> self_parent,
                                 std::optional<EventId> other_parent, std::vector<Bytes> txs)
{
    Event e;
    e.creator = p.id;
    e.timestamp = static_cast<std::int64_t>(step_) + p.clock_offset;
    e.transactions = std::move(txs);
    if (self_parent) {
        e.self_parent = p.graph.id_at(*self_parent);
        e.other_parent = other_parent;
    }
    auto ref = std::make_shared<const Event>(signed_event(std::move(e), pki_->key(p.id)));
    const InsertResult res = p.graph.insert(ref);
    if (res.status != InsertStatus::Inserted)
        throw std::logic_error(std::string("own event rejected: ") + to_string(res.status));
    snapshots_.emplace(res.id, std::make_pair(p.id, p.graph.size()));
    if (observer_) observer_->insert(ref);

    if (trace_.enabled()) {
        TraceRecord r;
        r.step = step_;
        r.kind = RecordKind::Created;
        r.party = p.id;
        r.event = res.id;
        r.round = p.graph.meta_at(res.index).round;
        r.witness = p.graph.meta_at(res.index).is_witness;
        r.payload = *ref;
        trace_.add(std::move(r));
    }
    return res.id;
}

SyncMessage Simulation::initiate_sync(PartyId from, PartyId to) const
{
    if (from == to) throw std::invalid_argument("a party does not sync to itself");
    const PartyState& p = parties_.at(from);
    SyncMessage m;
    m.sender = from;
    if (!p.corrupted) {
        m.events.reserve(p.graph.size());
        for (std::uint32_t i = 0; i < p.graph.size(); ++i) m.events.push_back({p.graph.id_at(i), p.graph.event_ref_at(i)});
        m.head = p.graph.id_at(p.tips.front());
        return m;
    }
    // a forker shows each target one branch, with that branch's ancestry only
    const std::uint32_t tip = p.tips[to % p.tips.size()];
    p.graph.ancestors_at(tip).for_each([&](std::size_t i) {
        const auto k = static_cast<std::uint32_t>(i);
        m.events.push_back({p.graph.id_at(k), p.graph.event_ref_at(k)});
    });
    m.head = p.graph.id_at(tip);
    return m;
}

SyncMessage Simulation::snapshot_of(const EventId& e) const
{
    const auto it = snapshots_.find(e);
    if (it == snapshots_.end()) throw UnknownEvent(e);
    const auto [creator, len] = it->second;
    const Hashgraph& g = parties_[creator].graph;
    SyncMessage m;
    m.sender = creator;
    m.events.reserve(len);
    for (std::uint32_t i = 0; i < len; ++i) m.events.push_back({g.id_at(i), g.event_ref_at(i)});
    m.head = e;
    return m;
}

std::uint32_t Simulation::insert_entries(PartyState& p, const SyncMessage& m)
{
    auto buffered = [&](const EventId& id) {
        return std::any_of(p.buffer.begin(), p.buffer.end(), [&](const SyncEntry& b) { return b.id == id; });
    };
    std::uint32_t inserted = 0;
    for (const auto& entry : m.events) {
        if (p.graph.contains(entry.id) || buffered(entry.id)) continue;
        const InsertResult r = p.graph.insert(entry.event);
        switch (r.status) {
        case InsertStatus::Inserted: ++inserted; break;
        case InsertStatus::Duplicate: break;
        case InsertStatus::MissingParents:
            p.buffer.push_back(entry);
            if (trace_.enabled()) {
                TraceRecord rec;
                rec.step = step_;
                rec.kind = RecordKind::Buffered;
                rec.party = p.id;
                rec.event = r.id;
                trace_.add(std::move(rec));
            }
            break;
        case InsertStatus::BadSignature:
        case InsertStatus::Malformed: ++p.dropped; break;
        }
    }
    for (bool progress = inserted > 0 && !p.buffer.empty(); progress;) {
        progress = false;
        for (auto it = p.buffer.begin(); it != p.buffer.end();) {
            const InsertResult r = p.graph.insert(it->event);
            if (r.status == InsertStatus::MissingParents) {
                ++it;
                continue;
            }
            if (r.status == InsertStatus::Inserted) {
                ++inserted;
                progress = true;
            } else if (r.status != InsertStatus::Duplicate) {
                ++p.dropped;
            }
            it = p.buffer.erase(it);
        }
    }
    return inserted;
}

void Simulation::run_consensus(PartyState& p)
{
    for (const auto& d : consensus::decide_fame(p.graph, coin_period())) {
        if (!trace_.enabled()) continue;
        TraceRecord r;
        r.step = step_;
        r.kind = RecordKind::FameDecided;
        r.party = p.id;
        r.event = d.event;
        r.round = d.round;
        r.fame = d.fame;
        trace_.add(std::move(r));
    }
    const auto batch = consensus::find_order(p.graph);
    p.log.commit(batch, p.graph);
    for (const auto& e : batch) {
        for (const auto& tx : p.graph.event(e.event).transactions)
            if (honest_tx_.contains(tx)) committed_honest_[p.id].insert(tx);
        if (!trace_.enabled()) continue;
        TraceRecord r;
        r.step = step_;
        r.kind = RecordKind::Committed;
        r.party = p.id;
        r.event = e.event;
        r.round_received = e.round_received;
        r.consensus_timestamp = e.consensus_timestamp;
        trace_.add(std::move(r));
    }
}

StepOutcome Simulation::on_receive_sync(PartyId pid, const SyncMessage& m)
{
    PartyState& p = mut(pid);
    StepOutcome out;
    out.inserted = insert_entries(p, m);
    if (out.inserted == 0) return out;

    const auto head = p.graph.find(m.head);
    if (head && p.graph.creator_at(*head) != pid) {
        std::vector<Bytes> txs(p.pending_tx.begin(), p.pending_tx.end());
        p.pending_tx.clear();
        if (!p.corrupted) {
            const EventId z = create_event(p, p.tips.front(), m.head, std::move(txs));
            p.tips.front() = p.graph.index_of(z);
            out.created.push_back(z);
        } else {
            const auto k = static_cast<std::size_t>(pick(byzantine_rng_, p.tips.size()));
            const double u = static_cast<double>(byzantine_rng_() >> 11) * 0x1.0p-53;
            if (u < opts_.fork_probability) {
                // two signed events on one self-parent: a fork
                const std::string tag = "fork-" + std::to_string(pid) + "-" + std::to_string(fork_counter_++);
                std::vector<Bytes> left = txs;
                left.push_back(to_bytes(tag + "-a"));
                txs.push_back(to_bytes(tag + "-b"));
                const EventId a = create_event(p, p.tips[k], m.head, std::move(left));
                const EventId b = create_event(p, p.tips[k], m.head, std::move(txs));
                p.tips = {p.graph.index_of(a), p.graph.index_of(b)};
                out.created = {a, b};
            } else {
                const EventId z = create_event(p, p.tips[k], m.head, std::move(txs));
                p.tips[k] = p.graph.index_of(z);
                out.created.push_back(z);
            }
        }
    }
    if (!p.corrupted) run_consensus(p);
    return out;
}

void Simulation::inject_due()
{
    while (next_injection_ < schedule_.size() && schedule_[next_injection_].step <= step_) {
        const TxInjection& inj = schedule_[next_injection_++];
        mut(inj.party).pending_tx.push_back(inj.tx);
        if (!cfg_.is_corrupted(inj.party)) honest_tx_.insert(inj.tx);
    }
}

void Simulation::check_prefix(PartyId p)
{
    if (parties_[p].corrupted) return;
    if (auto v = monitor_.update(p, parties_[p].log.entries()); v && !violation_) violation_ = v;
}

StepOutcome Simulation::apply(const Action& a)
{
    inject_due();
    StepOutcome out;
    switch (a.kind) {
    case Action::Kind::Deliver: {
        const auto it = std::lower_bound(pending_.begin(), pending_.end(), a.delivery,
                                         [](const PendingDelivery& d, std::uint64_t id) { return d.id < id; });
        if (it == pending_.end() || it->id != a.delivery)
            throw std::invalid_argument("no pending delivery " + std::to_string(a.delivery));
        PendingDelivery d = std::move(*it);
        pending_.erase(it);
        if (trace_.enabled()) {
            TraceRecord r;
            r.step = step_;
            r.kind = RecordKind::Delivered;
            r.party = d.target;
            r.sender = d.message.sender;
            r.delivery = d.id;
            r.event = d.message.head;
            trace_.add(std::move(r));
        }
        out = on_receive_sync(d.target, d.message);
        check_prefix(d.target);
        break;
    }
    case Action::Kind::Sync:
        pending_.push_back({next_delivery_++, a.to, step_, initiate_sync(a.from, a.to)});
        break;
    case Action::Kind::Forward: {
        const SyncMessage m = snapshot_of(a.event);
        if (trace_.enabled()) {
            TraceRecord r;
            r.step = step_;
            r.kind = RecordKind::Delivered;
            r.party = a.to;
            r.sender = m.sender;
            r.event = a.event;
            trace_.add(std::move(r));
        }
        out = on_receive_sync(a.to, m);
        check_prefix(a.to);
        break;
    }
    }
    ++step_;
    return out;
}

void Simulation::drain()
{
    while (!pending_.empty()) apply(Action::deliver(pending_.front().id));
}

RunResult Simulation::run_for(Scheduler& s, std::uint64_t steps)
{
    for (std::uint64_t i = 0; i < steps; ++i) step(s);
    return {violation_, all_injected_committed(), step_};
}

RunResult Simulation::run_until_committed(Scheduler& s)
{
    while (next_injection_ < schedule_.size() || !all_injected_committed()) {
        if (step_ >= cfg_.max_steps)
            throw Stalled("transactions still uncommitted after " + std::to_string(step_) + " steps");
        step(s);
    }
    drain();
    return {violation_, all_injected_committed(), step_};
}

bool Simulation::all_injected_committed() const
{
    for (const auto& p : parties_)
        if (!p.corrupted && committed_honest_[p.id].size() < honest_tx_.size()) return false;
    return true;
}

MetricsRow Simulation::metrics() const
{
    MetricsRow row;
    row.seed = cfg_.seed;
    row.n = cfg_.n;
    row.t = static_cast<std::uint32_t>(cfg_.corrupted.size());
    row.steps = step_;
    bool first = true;
    for (const auto& p : parties_) {
        if (p.corrupted) continue;
        const auto k = static_cast<std::uint64_t>(p.log.transactions().size());
        row.committed_tx = first ? k : std::min(row.committed_tx, k);
        first = false;
        row.max_round = std::max(row.max_round, p.graph.max_round());
    }
    if (observer_) row.max_round = std::max(row.max_round, observer_->max_round());
    return row;
}

}  // namespace hashgraph::sim
