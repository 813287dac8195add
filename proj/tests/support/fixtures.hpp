#pragma once

#include "hashgraph/consensus.hpp"
#include "hashgraph/hashgraph.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hgtest {

using namespace hashgraph;

inline Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

// Builds signed events by hand and inserts them into one graph.
class Builder {
public:
    Builder(std::uint32_t n, std::uint64_t seed = 1, Hashgraph::IdFunction id_fn = {})
        : pki_(std::make_shared<const Pki>(n, seed)), graph_(pki_, 0, std::move(id_fn))
    {
    }

    Event make(PartyId creator, std::optional<EventId> self_parent, std::optional<EventId> other_parent,
               std::vector<Bytes> txs = {})
    {
        Event e;
        e.creator = creator;
        e.timestamp = clock_++;
        e.self_parent = self_parent;
        e.other_parent = other_parent;
        e.transactions = std::move(txs);
        return signed_event(std::move(e), pki_->key(creator));
    }

    EventId add(const Event& e)
    {
        const auto r = graph_.insert(e);
        if (r.status != InsertStatus::Inserted && r.status != InsertStatus::Duplicate)
            throw std::runtime_error(std::string("fixture insert failed: ") + to_string(r.status));
        return r.id;
    }

    EventId genesis(PartyId c) { return add(make(c, std::nullopt, std::nullopt)); }

    // New event by `c` on top of its latest event, pointing at `other`.
    EventId extend(PartyId c, const EventId& other, std::vector<Bytes> txs = {})
    {
        const auto top = graph_.latest_by(c);
        if (!top) throw std::runtime_error("creator has no events");
        return add(make(c, graph_.id_at(*top), other, std::move(txs)));
    }

    // `c` hears from `from`'s latest event.
    EventId gossip(PartyId c, PartyId from) { return extend(c, graph_.id_at(*graph_.latest_by(from))); }

    [[nodiscard]] Hashgraph& graph() { return graph_; }
    [[nodiscard]] const std::shared_ptr<const Pki>& pki() const { return pki_; }
    void set_clock(std::int64_t t) { clock_ = t; }

private:
    std::shared_ptr<const Pki> pki_;
    Hashgraph graph_;
    std::int64_t clock_ = 0;
};

// Random gossip DAG over n creators. Self-parents are usually the creator's
// latest event; with probability fork_p an earlier one, which forks.
inline std::vector<Event> random_dag(std::mt19937_64& rng, std::uint32_t n, std::uint32_t events, double fork_p)
{
    auto pki = std::make_shared<const Pki>(n, 7);
    Hashgraph h(pki, 0);
    std::vector<Event> out;
    std::vector<std::vector<EventId>> by_creator(n);
    auto put = [&](Event e) {
        const PartyId c = e.creator;
        e = signed_event(std::move(e), pki->key(c));
        const auto r = h.insert(e);
        if (r.status != InsertStatus::Inserted) return;
        by_creator[e.creator].push_back(r.id);
        out.push_back(std::move(e));
    };
    std::int64_t clock = 0;
    for (PartyId c = 0; c < n; ++c) put(Event{c, clock++, {}, std::nullopt, std::nullopt, {}});
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    while (out.size() < events) {
        const auto c = static_cast<PartyId>(rng() % n);
        auto o = static_cast<PartyId>(rng() % n);
        if (o == c) o = (o + 1) % n;
        const auto& mine = by_creator[c];
        const auto& theirs = by_creator[o];
        const EventId self = coin(rng) < fork_p ? mine[rng() % mine.size()] : mine.back();
        const EventId other = theirs[theirs.size() - 1 - rng() % std::min<std::size_t>(theirs.size(), 3)];
        put(Event{c, clock++, {bytes_of("t" + std::to_string(clock))}, self, other, {}});
    }
    return out;
}

// Reachability and fork relations recomputed from parent pointers alone,
// following the definitions literally. Indices follow the input order.
class BruteForce {
public:
    BruteForce(const std::vector<Event>& events, std::uint32_t n) : n_(n), events_(events)
    {
        const std::size_t m = events.size();
        std::map<EventId, std::size_t> pos;
        for (std::size_t i = 0; i < m; ++i) pos[event_id(events[i])] = i;
        parents_.resize(m);
        self_parent_.assign(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            if (events[i].self_parent) {
                self_parent_[i] = pos.at(*events[i].self_parent);
                parents_[i].push_back(self_parent_[i]);
            }
            if (events[i].other_parent) parents_[i].push_back(pos.at(*events[i].other_parent));
        }
        anc_.assign(m, std::vector<bool>(m, false));
        for (std::size_t d = 0; d < m; ++d) {
            std::vector<std::size_t> stack{d};
            while (!stack.empty()) {
                const auto v = stack.back();
                stack.pop_back();
                if (anc_[d][v]) continue;
                anc_[d][v] = true;
                for (auto p : parents_[v]) stack.push_back(p);
            }
        }
        // observed[x][c]: x has two incomparable ancestors by c
        observed_.assign(m, std::vector<bool>(n, false));
        for (std::size_t x = 0; x < m; ++x)
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = a + 1; b < m; ++b)
                    if (anc_[x][a] && anc_[x][b] && events[a].creator == events[b].creator && !anc_[a][b] &&
                        !anc_[b][a])
                        observed_[x][events[a].creator] = true;
    }

    [[nodiscard]] bool ancestor(std::size_t a, std::size_t d) const { return anc_[d][a]; }

    [[nodiscard]] bool self_ancestor(std::size_t a, std::size_t d) const
    {
        for (std::size_t v = d; v < events_.size(); v = self_parent_[v])
            if (v == a) return true;
        return false;
    }

    [[nodiscard]] bool sees(std::size_t x, std::size_t y) const
    {
        return anc_[x][y] && !observed_[x][events_[y].creator];
    }

    // Some set of more than 2n/3 events with distinct creators through which x
    // sees y. Enumerates creator subsets.
    [[nodiscard]] bool strongly_sees(std::size_t x, std::size_t y) const
    {
        std::vector<bool> via(n_, false);
        for (std::size_t s = 0; s < events_.size(); ++s)
            if (sees(x, s) && sees(s, y)) via[events_[s].creator] = true;
        for (std::uint32_t mask = 0; mask < (1U << n_); ++mask) {
            const auto size = static_cast<std::uint32_t>(__builtin_popcount(mask));
            if (3 * size <= 2 * n_) continue;
            bool all = true;
            for (std::uint32_t c = 0; c < n_ && all; ++c)
                if ((mask >> c) & 1U) all = via[c];
            if (all) return true;
        }
        return false;
    }

    [[nodiscard]] std::size_t fork_pairs(PartyId c) const
    {
        std::size_t count = 0;
        for (std::size_t a = 0; a < events_.size(); ++a)
            for (std::size_t b = a + 1; b < events_.size(); ++b)
                if (events_[a].creator == c && events_[b].creator == c && !anc_[a][b] && !anc_[b][a]) ++count;
        return count;
    }

private:
    std::uint32_t n_;
    const std::vector<Event>& events_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::size_t> self_parent_;
    std::vector<std::vector<bool>> anc_;
    std::vector<std::vector<bool>> observed_;
};

}  // namespace hgtest
