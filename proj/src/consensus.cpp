#include "hashgraph/consensus.hpp"

#include <algorithm>
#include <bit>

namespace hashgraph::consensus {

struct Access {
    using VoteRecord = Hashgraph::VoteRecord;
    static auto& node(Hashgraph& h, std::uint32_t i) { return h.nodes_[i]; }
    static auto& undecided(Hashgraph& h) { return h.undecided_; }
    static int& coin_period(Hashgraph& h) { return h.coin_period_; }
    static int& ordered_through(Hashgraph& h) { return h.ordered_through_round_; }
    static auto& skipped(Hashgraph& h) { return h.skipped_rounds_; }
    static const auto& skipped(const Hashgraph& h) { return h.skipped_rounds_; }
    static DynamicBitset& received(Hashgraph& h) { return h.received_; }
    static auto& fresh_witnesses(Hashgraph& h) { return h.fresh_witnesses_; }
    static std::uint32_t& fame_frontier(Hashgraph& h) { return h.fame_frontier_; }
};

CoinPeriod::CoinPeriod(int c) : c_(c)
{
    if (c < 2) throw std::invalid_argument("coin period must be at least 2");
}

RoundAssignment assign_round(const Hashgraph& h, std::uint32_t x)
{
    const std::uint32_t sp = h.self_parent_at(x);
    if (sp == Hashgraph::npos) return {1, true};
    const std::uint32_t op = h.other_parent_at(x);
    const int r = std::max(h.meta_at(sp).round, h.meta_at(op).round);
    if (h.meta_at(sp).round == 0 || h.meta_at(op).round == 0)
        throw std::logic_error("parents of " + h.id_at(x).hex() + " have no round");

    std::uint64_t creators = 0;
    for (std::uint32_t w : h.witnesses(r))
        if (w != x && h.strongly_sees(x, w)) creators |= std::uint64_t{1} << h.creator_at(w);
    const int round = is_supermajority(static_cast<std::size_t>(std::popcount(creators)), h.n()) ? r + 1 : r;
    return {round, round > h.meta_at(sp).round};
}

RoundAssignment assign_round(const Hashgraph& h, const EventId& x)
{
    return assign_round(h, h.index_of(x));
}

const std::vector<std::uint32_t>& strongly_seen_previous_witnesses(Hashgraph& h, std::uint32_t y)
{
    auto& node = Access::node(h, y);
    if (!node.strongly_seen_prev) {
        std::vector<std::uint32_t> seen;
        for (std::uint32_t w : h.witnesses(node.meta.round - 1))
            if (h.strongly_sees(y, w)) seen.push_back(w);
        node.strongly_seen_prev = std::move(seen);
    }
    return *node.strongly_seen_prev;
}

namespace {

void check_coin_period(Hashgraph& h, CoinPeriod c)
{
    int& stored = Access::coin_period(h);
    if (stored == 0) stored = c.value();
    if (stored != c.value()) throw std::invalid_argument("coin period changed for an existing hashgraph");
}

}  // namespace

Vote vote(Hashgraph& h, std::uint32_t target, std::uint32_t voter, CoinPeriod c)
{
    check_coin_period(h, c);
    const DerivedMeta& tm = h.meta_at(target);
    const DerivedMeta& ym = h.meta_at(voter);
    if (!tm.is_witness || !ym.is_witness || ym.round <= tm.round)
        throw std::invalid_argument("vote requires two witnesses with voter in a later round");

    auto& memo = Access::node(h, voter).votes;
    const int d = ym.round - tm.round;
    const bool coin = c.is_coin_round(d);
    if (auto it = memo.find(target); it != memo.end())
        return {it->second.value, d > 1 && !coin && it->second.supermajority};

    bool value = false;
    bool supermajority = false;
    if (d == 1) {
        value = h.sees(voter, target);
    } else {
        std::size_t yes = 0;
        std::size_t no = 0;
        // copy: the recursive votes below may rehash other nodes' scratch, not this list
        const std::vector<std::uint32_t> prev = strongly_seen_previous_witnesses(h, voter);
        for (std::uint32_t w : prev) {
            if (vote(h, target, w, c).value)
                ++yes;
            else
                ++no;
        }
        const bool majority = yes >= no;
        const std::size_t tally = majority ? yes : no;
        supermajority = is_supermajority(tally, h.n());
        if (!coin || supermajority)
            value = majority;
        else
            value = middle_bit(h.event_at(voter).signature);
    }
    Access::node(h, voter).votes.emplace(target, Access::VoteRecord{value, supermajority});
    return {value, d > 1 && !coin && supermajority};
}

std::vector<FameDecision> decide_fame(Hashgraph& h, CoinPeriod c)
{
    check_coin_period(h, c);
    auto& undecided = Access::undecided(h);
    auto& fresh = Access::fresh_witnesses(h);
    const std::uint32_t frontier = Access::fame_frontier(h);

    // A vote depends only on the voter's ancestors, so a witness that was
    // already checked against every older voter can only be decided by a
    // voter inserted since then.
    std::sort(fresh.begin(), fresh.end(), [&](std::uint32_t a, std::uint32_t b) {
        const int ra = h.meta_at(a).round;
        const int rb = h.meta_at(b).round;
        if (ra != rb) return ra < rb;
        if (h.creator_at(a) != h.creator_at(b)) return h.creator_at(a) < h.creator_at(b);
        return h.id_at(a) < h.id_at(b);
    });

    std::vector<FameDecision> decided;
    const std::vector<std::pair<int, std::uint32_t>> pending(undecided.begin(), undecided.end());
    for (const auto& [round, x] : pending) {
        int decided_round = 0;
        bool value = false;
        auto consider = [&](std::uint32_t y) {
            const Vote v = vote(h, x, y, c);
            if (!v.decided) return false;
            decided_round = h.meta_at(y).round;
            value = v.value;
            return true;
        };
        if (x >= frontier) {
            for (int r = round + 1; r <= h.max_round() && decided_round == 0; ++r)
                for (std::uint32_t y : h.witnesses(r))
                    if (consider(y)) break;
        } else {
            for (std::uint32_t y : fresh)
                if (h.meta_at(y).round > round && consider(y)) break;
        }
        if (decided_round == 0) continue;
        auto& node = Access::node(h, x);
        node.meta.fame = value ? Fame::Famous : Fame::NotFamous;
        node.decided_by_round = decided_round;
        undecided.erase({round, x});
        decided.push_back({h.id_at(x), x, node.meta.fame, round, decided_round});
    }
    fresh.clear();
    Access::fame_frontier(h) = h.size();
    return decided;
}

std::vector<std::uint32_t> unique_famous_witnesses(const Hashgraph& h, int r)
{
    std::vector<std::uint32_t> famous;
    std::vector<int> per_creator(h.n(), 0);
    for (std::uint32_t w : h.witnesses(r)) {
        if (h.meta_at(w).fame == Fame::Famous) {
            famous.push_back(w);
            ++per_creator[h.creator_at(w)];
        }
    }
    std::erase_if(famous, [&](std::uint32_t w) { return per_creator[h.creator_at(w)] != 1; });
    return famous;
}

std::int64_t lower_median(std::vector<std::int64_t> values)
{
    if (values.empty()) throw std::invalid_argument("median of an empty set");
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

std::vector<CommitEntry> find_order(Hashgraph& h)
{
    std::vector<CommitEntry> batch;
    int& through = Access::ordered_through(h);
    const auto& undecided = Access::undecided(h);
    DynamicBitset& received = Access::received(h);

    while (through < h.max_round()) {
        const int r = through + 1;
        // no witness in or before r may be undecided
        if (!undecided.empty() && undecided.begin()->first <= r) break;

        const auto famous = unique_famous_witnesses(h, r);
        if (famous.empty()) {
            Access::skipped(h).push_back(r);
            through = r;
            continue;
        }

        DynamicBitset candidates = h.ancestors_at(famous.front());
        for (std::size_t k = 1; k < famous.size(); ++k) candidates &= h.ancestors_at(famous[k]);
        candidates.subtract(received);

        candidates.for_each([&](std::size_t xi) {
            const auto x = static_cast<std::uint32_t>(xi);
            std::vector<std::int64_t> stamps;
            stamps.reserve(famous.size());
            Signature whitened = h.event_at(x).signature;
            for (std::uint32_t w : famous) {
                // earliest self-ancestor of w that descends from x
                std::uint32_t z = w;
                for (std::uint32_t sp = h.self_parent_at(z); sp != Hashgraph::npos && h.is_ancestor(x, sp);
                     sp = h.self_parent_at(z))
                    z = sp;
                stamps.push_back(h.event_at(z).timestamp);
                whitened ^= h.event_at(w).signature;
            }
            auto& meta = Access::node(h, x).meta;
            meta.round_received = r;
            meta.consensus_timestamp = lower_median(std::move(stamps));
            received.set(x);
            batch.push_back({h.id_at(x), r, *meta.consensus_timestamp, whitened});
        });
        through = r;
    }
    std::sort(batch.begin(), batch.end(), [](const CommitEntry& a, const CommitEntry& b) { return a.key() < b.key(); });
    return batch;
}

std::vector<int> skipped_rounds(const Hashgraph& h)
{
    return Access::skipped(h);
}

void CommitLog::commit(const std::vector<CommitEntry>& batch, const Hashgraph& h)
{
    const CommitEntry* prev = entries_.empty() ? nullptr : &entries_.back();
    for (const auto& e : batch) {
        if (prev != nullptr && !(prev->key() < e.key()))
            throw OrderViolation("commit key of " + e.event.hex() + " does not follow the log tail");
        prev = &e;
    }
    for (const auto& e : batch) {
        entries_.push_back(e);
        const auto& txs = h.event(e.event).transactions;
        transactions_.insert(transactions_.end(), txs.begin(), txs.end());
    }
}

}  // namespace hashgraph::consensus
