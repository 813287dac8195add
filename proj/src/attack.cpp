#include "hashgraph/attack.hpp"

#include <algorithm>
#include <sstream>

namespace hashgraph::attack {

using consensus::quorum;
using sim::Action;
using sim::Simulation;

const char* to_string(Phase p) noexcept
{
    switch (p) {
    case Phase::Zig: return "zig";
    case Phase::LowerZag: return "lower_zag";
    case Phase::UpperZag: return "upper_zag";
    case Phase::Zag: return "zag";
    case Phase::FixVotes: return "fix_votes";
    case Phase::MakeWitnesses: return "make_witnesses";
    case Phase::CoinRound: return "coin_round";
    case Phase::Decided: return "decided";
    }
    return "?";
}

std::uint32_t AttackPhase::yes() const
{
    return static_cast<std::uint32_t>(std::count(votes.begin(), votes.end(), true));
}

std::optional<int> DelayStats::overhead() const
{
    if (!decided_at || !supermajority_round) return std::nullopt;
    return *decided_at - *supermajority_round;
}

namespace {

Fame fame_at(const Hashgraph& h, const EventId& x)
{
    const auto i = h.find(x);
    return i ? h.meta_at(*i).fame : Fame::Undecided;
}

// Delivers to labeled parties the syncs their peers made right after creating
// a given event, and returns the single event each delivery triggers.
class Builder {
public:
    Builder(Simulation& sim, const AttackLabeling& labels) : sim_(sim), labels_(labels) {}

    EventId allow(std::uint32_t label, const EventId& e)
    {
        const PartyId p = labels_.party(label);
        const auto out = sim_.apply(Action::forward(p, e));
        if (out.created.size() != 1)
            throw ConstructionFailed("party " + std::to_string(p) + " created " + std::to_string(out.created.size()) +
                                     " events on receiving " + e.hex());
        return out.created.front();
    }

    PartyId creator(const EventId& e) const { return sim_.observer().event(e).creator; }

private:
    Simulation& sim_;
    const AttackLabeling& labels_;
};

void require_attackable(const Simulation& sim)
{
    if (sim.n() < kMinParties)
        throw PreconditionViolated("the delay attack requires n >= 7 parties, got n=" + std::to_string(sim.n()));
    if (!sim.config().corrupted.empty()) throw PreconditionViolated("the delay attack runs with every party honest");
    const Hashgraph& h = sim.observer();
    for (PartyId c = 0; c < sim.n(); ++c)
        if (!h.forks_by(c).empty()) throw PreconditionViolated("forks present in the execution");
}

void require_isolated(const Hashgraph& h, int round)
{
    if (const auto pairs = mutual_sightings(h, round); !pairs.empty())
        throw ConstructionFailed("round " + std::to_string(round) + " witness " + pairs.front().first.hex() +
                                 " sees " + pairs.front().second.hex());
}

void require_not_witnesses(const Hashgraph& h, const AttackPhase& phase, std::initializer_list<const char*> names)
{
    for (const char* name : names) {
        const DerivedMeta& m = h.meta(phase.anchors.at(name));
        if (m.is_witness && m.round == phase.round)
            throw ConstructionFailed(std::string("anchor ") + name + " became a round " + std::to_string(phase.round) +
                                     " witness");
    }
}

void record_tally(Simulation& sim, const AttackPhase& phase)
{
    sim::TraceRecord r;
    r.step = sim.step_count();
    r.kind = sim::RecordKind::VoteTally;
    r.event = phase.target;
    r.round = phase.round;
    r.yes = phase.yes();
    r.no = phase.no();
    r.coin = phase.coin;
    sim.record(std::move(r));
}

}  // namespace

bool minority_quorum_exists(const std::vector<bool>& votes)
{
    const AttackLabeling l = label_by_votes(votes);
    const auto q = quorum(static_cast<std::uint32_t>(votes.size()));
    const auto minority = static_cast<std::uint32_t>(votes.size()) - l.cv;
    // all minority voters plus the fewest majority voters; ties count as yes
    return l.v ? 2 * minority > q : 2 * minority >= q;
}

AttackLabeling label_by_votes(const std::vector<bool>& votes)
{
    const auto yes = static_cast<std::uint32_t>(std::count(votes.begin(), votes.end(), true));
    const auto no = static_cast<std::uint32_t>(votes.size()) - yes;
    AttackLabeling l;
    l.v = yes >= no;  // ties go to yes
    l.cv = l.v ? yes : no;
    for (PartyId p = 0; p < votes.size(); ++p)
        if (votes[p] == l.v) l.perm.push_back(p);
    for (PartyId p = 0; p < votes.size(); ++p)
        if (votes[p] != l.v) l.perm.push_back(p);
    return l;
}

std::vector<bool> witness_votes(Simulation& sim, const EventId& x, int round, std::vector<EventId>* witnesses)
{
    Hashgraph& h = sim.observer();
    const std::uint32_t xi = h.index_of(x);
    const auto& ws = h.witnesses(round);
    if (ws.size() != sim.n())
        throw ConstructionFailed("round " + std::to_string(round) + " has " + std::to_string(ws.size()) +
                                 " witnesses, expected one per party");
    std::vector<bool> votes(sim.n());
    std::vector<EventId> ids(sim.n());
    for (std::uint32_t w : ws) {
        const PartyId c = h.creator_at(w);
        votes[c] = consensus::vote(h, xi, w, sim.coin_period()).value;
        ids[c] = h.id_at(w);
    }
    if (witnesses != nullptr) *witnesses = std::move(ids);
    return votes;
}

std::vector<std::pair<EventId, EventId>> mutual_sightings(const Hashgraph& h, int round)
{
    std::vector<std::pair<EventId, EventId>> out;
    const auto& ws = h.witnesses(round);
    for (std::uint32_t a : ws)
        for (std::uint32_t b : ws)
            if (a != b && h.sees(a, b)) out.emplace_back(h.id_at(a), h.id_at(b));
    return out;
}

AttackPhase run_base_case(Simulation& sim, EventId x)
{
    require_attackable(sim);
    const Hashgraph& h = sim.observer();
    const std::uint32_t xi = h.index_of(x);
    const int r = h.meta_at(xi).round;
    if (!h.meta_at(xi).is_witness) throw PreconditionViolated("target is not a witness");
    if (h.max_round() != r) throw PreconditionViolated("execution already has rounds past the target's");
    require_isolated(h, r);

    const std::uint32_t n = sim.n();
    const std::uint32_t q = quorum(n);
    AttackPhase phase;
    phase.target = x;
    phase.target_round = r;
    phase.round = r + 1;
    phase.labeling.perm.push_back(h.creator_at(xi));
    for (PartyId p = 0; p < n; ++p)
        if (p != h.creator_at(xi)) phase.labeling.perm.push_back(p);

    std::vector<EventId> prev(n);
    for (std::uint32_t w : h.witnesses(r)) prev[h.creator_at(w)] = h.id_at(w);

    Builder b(sim, phase.labeling);
    const auto& L = phase.labeling;

    // zig over the rightmost q parties
    const std::uint32_t zig_end = n - q + 1;
    EventId e = prev[L.party(n)];
    for (std::uint32_t i = n - 1; i >= zig_end; --i) e = b.allow(i, e);

    // zag back up to p_{n-2}, then A and B off its end
    const std::uint32_t zag_start = zig_end;
    for (std::uint32_t i = zag_start + 1; i <= n - 2; ++i) e = b.allow(i, e);
    const EventId C = e;
    const EventId B = b.allow(n - 1, C);
    const EventId A = b.allow(n, C);

    // fix the votes: only the first floor(n/2) parties see x
    b.allow(n - 1, A);
    b.allow(n, B);
    for (std::uint32_t i = n / 2 + 1; i <= n - 2; ++i) {
        b.allow(i, A);
        b.allow(i, B);
    }
    for (std::uint32_t i = 2; i < zag_start; ++i) {
        b.allow(i, x);
        b.allow(i, A);
    }
    for (std::uint32_t i = zag_start; i <= n / 2; ++i) {
        b.allow(i, x);
        b.allow(i, A);
        b.allow(i, B);
    }
    b.allow(1, A);

    phase.anchors = {{"A", A}, {"B", B}, {"C", C}};
    phase.votes = witness_votes(sim, x, phase.round, &phase.witnesses);
    require_isolated(sim.observer(), phase.round);
    require_not_witnesses(sim.observer(), phase, {"A", "B"});
    record_tally(sim, phase);
    return phase;
}

AttackPhase run_inductive_step(Simulation& sim, const AttackPhase& prev)
{
    require_attackable(sim);
    const std::uint32_t n = sim.n();
    const std::uint32_t q = quorum(n);
    if (prev.votes.size() != n || prev.witnesses.size() != n)
        throw PreconditionViolated("previous round votes are not known for every party");
    if (prev.yes() >= q || prev.no() >= q)
        throw PreconditionViolated("a quorum already agrees on round " + std::to_string(prev.round));
    require_isolated(sim.observer(), prev.round);

    AttackPhase phase;
    phase.target = prev.target;
    phase.target_round = prev.target_round;
    phase.round = prev.round + 1;
    phase.coin = sim.coin_period().is_coin_round(phase.round - phase.target_round);
    phase.labeling = label_by_votes(prev.votes);
    const auto& L = phase.labeling;
    Builder b(sim, L);

    // full-width zig, with p_1 forking off p_3's event
    std::vector<EventId> zig(n + 1);
    EventId e = prev.witnesses[L.party(n)];
    for (std::uint32_t i = n - 1; i >= 2; --i) {
        e = b.allow(i, e);
        zig[i] = e;
    }
    const EventId fork_end = b.allow(1, zig[3]);

    // lower zag over the rightmost q parties; p_q skips p_{q-1}
    const std::uint32_t lower_start = n - q + 1;
    std::vector<EventId> lower(n + 1);
    e = zig[lower_start];
    for (std::uint32_t i = lower_start + 1; i <= n - 1; ++i) {
        lower[i] = b.allow(i, e);
        if (i != q - 1) e = lower[i];
    }
    e = lower[n - 2];
    b.allow(n, e);
    const EventId A = lower[n - 1];
    const EventId B = b.allow(n, lower[q - 1]);

    // upper zag over the leftmost q parties, starting from p_1's forked end;
    // D misses p_{q-1}'s event
    e = fork_end;
    EventId c;
    for (std::uint32_t i = 2; i <= q - 1; ++i) {
        const EventId ev = b.allow(i, e);
        if (i != q - 1)
            e = ev;
        else
            c = ev;
    }
    const EventId D = b.allow(q, e);
    const EventId C = b.allow(1, c);

    for (std::uint32_t i = L.cv + 1; i <= n; ++i) {
        if (L.party(i) != b.creator(A)) b.allow(i, A);
        if (L.party(i) != b.creator(B)) b.allow(i, B);
    }
    for (std::uint32_t i = 1; i <= L.cv; ++i) {
        if (L.party(i) != b.creator(C)) b.allow(i, C);
        if (L.party(i) != b.creator(D)) b.allow(i, D);
    }

    phase.phase = phase.coin ? Phase::CoinRound : Phase::MakeWitnesses;
    phase.anchors = {{"A", A}, {"B", B}, {"C", C}, {"D", D}, {"e", e}, {"c", c}};
    phase.votes = witness_votes(sim, phase.target, phase.round, &phase.witnesses);
    require_isolated(sim.observer(), phase.round);
    require_not_witnesses(sim.observer(), phase, {"A", "B", "C", "D"});
    record_tally(sim, phase);
    return phase;
}

DelayStats run_delay_attack(Simulation& sim, EventId x, int max_rounds)
{
    const std::uint32_t n = sim.n();
    const std::uint32_t q = quorum(n);
    DelayStats stats;
    stats.target = x;

    auto check_undecided = [&](int round) {
        for (const auto& p : sim.parties()) {
            if (fame_at(p.graph, x) != Fame::Undecided) {
                stats.failures.push_back("party " + std::to_string(p.id) + " decided the target by round " +
                                         std::to_string(round));
                return;
            }
        }
    };

    AttackPhase phase = run_base_case(sim, x);
    stats.target_round = phase.target_round;
    check_undecided(phase.round);
    bool quorum_reached = false;
    while (!quorum_reached) {
        if (phase.coin) {
            ++stats.coin_rounds_elapsed;
            stats.per_coin_round_yes_counts.push_back(phase.yes());
        }
        if (phase.yes() >= q || phase.no() >= q) {
            quorum_reached = true;
            if (phase.coin) stats.supermajority_round = phase.round;
            break;
        }
        if (phase.round - phase.target_round >= max_rounds) break;

        const bool packable = minority_quorum_exists(phase.votes);
        if (!packable && !stats.control_lost_round) stats.control_lost_round = phase.round + 1;
        AttackPhase next = run_inductive_step(sim, phase);
        if (!next.coin && packable) {
            if (next.votes != phase.votes)
                stats.failures.push_back("votes changed in round " + std::to_string(next.round));
            else
                check_undecided(next.round);
        }
        phase = std::move(next);
    }

    if (quorum_reached) {
        // the decision is left to ordinary gossip
        sim::FairScheduler fair(sim.config().seed);
        const std::uint64_t limit = sim.step_count() + 200000;
        auto all_decided = [&] {
            return std::all_of(sim.parties().begin(), sim.parties().end(),
                               [&](const sim::PartyState& p) { return fame_at(p.graph, x) != Fame::Undecided; });
        };
        while (!all_decided()) {
            if (sim.step_count() >= limit) {
                stats.failures.push_back("target undecided after the fair hand-over");
                break;
            }
            sim.step(fair);
        }
    }

    Hashgraph& obs = sim.observer();
    for (const auto& d : consensus::decide_fame(obs, sim.coin_period())) {
        if (d.event != x) continue;
        stats.decided_at = d.decided_round;
        stats.fame = d.fame;
    }
    if (!stats.decided_at && obs.meta(x).fame != Fame::Undecided)
        stats.failures.push_back("target decided before the observer recorded the deciding round");
    stats.rounds_elapsed = (stats.decided_at ? *stats.decided_at : phase.round) - stats.target_round;
    for (PartyId c = 0; c < n; ++c)
        if (!obs.forks_by(c).empty()) stats.failures.push_back("party " + std::to_string(c) + " forked");
    return stats;
}

std::string stats_csv_row(std::uint64_t seed, std::uint32_t n, int coin_period, const DelayStats& s)
{
    std::ostringstream out;
    auto opt = [&](const std::optional<int>& v) {
        if (v) out << *v;
    };
    out << seed << ',' << n << ',' << coin_period << ',' << s.target_round << ',' << s.rounds_elapsed << ','
        << s.coin_rounds_elapsed << ',';
    opt(s.decided_at);
    out << ',';
    opt(s.supermajority_round);
    out << ',';
    opt(s.overhead());
    out << ',';
    opt(s.control_lost_round);
    out << ',' << (s.fame ? to_string(*s.fame) : "undecided") << ',';
    for (std::size_t i = 0; i < s.per_coin_round_yes_counts.size(); ++i)
        out << (i > 0 ? ";" : "") << s.per_coin_round_yes_counts[i];
    return out.str();
}

}  // namespace hashgraph::attack
