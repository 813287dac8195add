#include "hashgraph/consensus.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

using namespace hashgraph;
using namespace hashgraph::consensus;
using hgtest::Builder;

namespace {

// Round-robin gossip: each party hears from its predecessor in turn.
void ring(Builder& b, int laps, std::uint32_t among)
{
    for (int lap = 0; lap < laps; ++lap)
        for (PartyId c = 0; c < among; ++c) b.gossip(c, (c + among - 1) % among);
}

Builder full_graph(std::uint32_t n, int laps)
{
    Builder b(n);
    for (PartyId c = 0; c < n; ++c) b.genesis(c);
    ring(b, laps, n);
    return b;
}

}  // namespace

TEST(Rounds, Genesis)
{
    Builder b(4);
    const auto g = b.genesis(2);
    const auto ra = assign_round(b.graph(), g);
    EXPECT_EQ(ra.round, 1);
    EXPECT_TRUE(ra.is_witness);
}

TEST(Rounds, TwoOfFourStronglySeenStaysInRound)
{
    Builder b(4);
    for (PartyId c = 0; c < 4; ++c) b.genesis(c);
    b.gossip(1, 0);
    b.gossip(0, 1);
    const auto x = b.gossip(1, 0);
    auto& h = b.graph();
    int seen = 0;
    for (std::uint32_t w : h.witnesses(1)) seen += h.strongly_sees(h.index_of(x), w) ? 1 : 0;
    EXPECT_LE(seen, 2);
    EXPECT_EQ(h.meta(x).round, 1);
    EXPECT_FALSE(h.meta(x).is_witness);
}

TEST(Rounds, FullGossipAdvances)
{
    Builder b = full_graph(4, 6);
    EXPECT_GE(b.graph().max_round(), 3);
    for (int r = 1; r < b.graph().max_round(); ++r) EXPECT_EQ(b.graph().witnesses(r).size(), 4U);
}

TEST(Rounds, MatchBruteForceRecomputation)
{
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = static_cast<std::uint32_t>(3 + rng() % 4);
        const auto events = hgtest::random_dag(rng, n, 40, 0.05);
        const hgtest::BruteForce bf(events, n);
        Hashgraph h(std::make_shared<const Pki>(n, 7), 0);
        for (const auto& e : events) h.insert(e);
        // rounds by the definition, in insertion order
        std::map<EventId, std::size_t> pos;
        std::vector<int> round(events.size());
        std::vector<std::size_t> self(events.size(), events.size());
        for (std::size_t i = 0; i < events.size(); ++i) {
            pos[event_id(events[i])] = i;
            if (events[i].is_genesis()) {
                round[i] = 1;
                continue;
            }
            self[i] = pos.at(*events[i].self_parent);
            const int r = std::max(round[self[i]], round[pos.at(*events[i].other_parent)]);
            std::vector<bool> creators(n, false);
            for (std::size_t w = 0; w < i; ++w) {
                const bool witness = round[w] == r && (events[w].is_genesis() || round[self[w]] < r);
                if (witness && bf.strongly_sees(i, w)) creators[events[w].creator] = true;
            }
            const auto count = static_cast<std::uint32_t>(std::count(creators.begin(), creators.end(), true));
            round[i] = 3 * count > 2 * n ? r + 1 : r;
        }
        for (std::uint32_t i = 0; i < h.size(); ++i) {
            ASSERT_EQ(h.meta_at(i).round, round[i]);
            const bool witness = events[i].is_genesis() || round[self[i]] < round[i];
            ASSERT_EQ(h.meta_at(i).is_witness, witness);
        }
    }
}

TEST(CoinPeriodTest, RejectsPeriodsBelowTwo)
{
    EXPECT_THROW(CoinPeriod(1), std::invalid_argument);
    EXPECT_TRUE(CoinPeriod(10).is_coin_round(20));
    EXPECT_FALSE(CoinPeriod(10).is_coin_round(19));
    EXPECT_EQ(quorum(7), 5U);
    EXPECT_EQ(quorum(4), 3U);
    EXPECT_TRUE(is_supermajority(5, 7));
    EXPECT_FALSE(is_supermajority(4, 7));
}

TEST(Fame, FirstElectionRoundVotesBySight)
{
    Builder b = full_graph(4, 4);
    auto& h = b.graph();
    for (std::uint32_t x : h.witnesses(1))
        for (std::uint32_t y : h.witnesses(2)) EXPECT_EQ(vote(h, x, y, CoinPeriod()).value, h.sees(y, x));
}

TEST(Fame, SupermajorityDecidesFamous)
{
    Builder b = full_graph(4, 6);
    auto& h = b.graph();
    const auto decided = decide_fame(h, CoinPeriod());
    ASSERT_FALSE(decided.empty());
    for (std::uint32_t x : h.witnesses(1)) EXPECT_EQ(h.meta_at(x).fame, Fame::Famous);
    for (const auto& d : decided) {
        EXPECT_GT(d.decided_round, d.round + 1);
        EXPECT_EQ(h.meta_at(d.index).fame, d.fame);
    }
    EXPECT_TRUE(decide_fame(h, CoinPeriod()).empty());
}

TEST(Fame, UndecidedWithoutEnoughRounds)
{
    Builder b = full_graph(4, 1);
    auto& h = b.graph();
    EXPECT_TRUE(decide_fame(h, CoinPeriod()).empty());
    EXPECT_TRUE(find_order(h).empty());
    EXPECT_TRUE(unique_famous_witnesses(h, 1).empty());
}

TEST(Fame, LateWitnessIsNotFamous)
{
    // parties 0..2 make progress while party 3's genesis is withheld
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Builder b(4, seed);
        std::mt19937_64 rng(seed);
        for (PartyId c = 0; c < 3; ++c) b.genesis(c);
        auto& h = b.graph();
        while (h.max_round() < 5) {
            const auto c = static_cast<PartyId>(rng() % 3);
            b.gossip(c, static_cast<PartyId>((c + 1 + rng() % 2) % 3));
        }
        decide_fame(h, CoinPeriod());
        ASSERT_NE(h.meta_at(h.witnesses(1).front()).fame, Fame::Undecided);
        const auto late = b.genesis(3);
        for (int i = 0; i < 40; ++i) {
            const auto c = static_cast<PartyId>(rng() % 4);
            b.gossip(c, static_cast<PartyId>((c + 1 + rng() % 3) % 4));
            decide_fame(h, CoinPeriod());
        }
        EXPECT_EQ(h.meta(late).round, 1);
        EXPECT_EQ(h.meta(late).fame, Fame::NotFamous) << "seed " << seed;
    }
}

TEST(Order, HonestRoundHasAllWitnessesUniqueFamous)
{
    Builder b = full_graph(4, 8);
    auto& h = b.graph();
    decide_fame(h, CoinPeriod());
    const auto unique = unique_famous_witnesses(h, 1);
    EXPECT_EQ(unique.size(), 4U);
    const auto entries = find_order(h);
    ASSERT_FALSE(entries.empty());
    for (std::size_t i = 1; i < entries.size(); ++i) EXPECT_LT(entries[i - 1].key(), entries[i].key());
    // the genesis events are received in round 2 at the latest
    for (PartyId c = 0; c < 4; ++c) {
        const auto& m = h.meta_at(h.by_creator(c).front());
        ASSERT_TRUE(m.round_received.has_value());
        EXPECT_LE(*m.round_received, 2);
    }
    EXPECT_TRUE(find_order(h).empty());
}

TEST(Order, TimestampIsMedianOfFirstDescendants)
{
    Builder b = full_graph(4, 8);
    auto& h = b.graph();
    decide_fame(h, CoinPeriod());
    find_order(h);
    for (std::uint32_t x = 0; x < h.size(); ++x) {
        const auto& m = h.meta_at(x);
        if (!m.round_received) continue;
        std::vector<std::int64_t> s;
        for (std::uint32_t w : unique_famous_witnesses(h, *m.round_received)) {
            std::uint32_t z = w;
            while (h.self_parent_at(z) != Hashgraph::npos && h.is_ancestor(x, h.self_parent_at(z)))
                z = h.self_parent_at(z);
            s.push_back(h.event_at(z).timestamp);
        }
        EXPECT_EQ(*m.consensus_timestamp, lower_median(s));
    }
}

TEST(Order, LowerMedian)
{
    EXPECT_EQ(lower_median({30, 10, 20}), 20);
    EXPECT_EQ(lower_median({40, 10, 30, 20}), 20);
    EXPECT_EQ(lower_median({5}), 5);
}

TEST(Order, WhitenedIsXorOfSignatures)
{
    Signature x;
    Signature a;
    Signature c;
    x.bytes.fill(0xF0);
    a.bytes.fill(0x0F);
    c.bytes.fill(0xFF);
    x ^= a;
    x ^= c;
    EXPECT_EQ(x.bytes[0], 0x00);
}

TEST(Log, EmptyBatchAndOrderViolation)
{
    Builder b = full_graph(4, 8);
    auto& h = b.graph();
    decide_fame(h, CoinPeriod());
    const auto entries = find_order(h);
    ASSERT_GE(entries.size(), 2U);
    CommitLog log;
    log.commit({}, h);
    EXPECT_TRUE(log.entries().empty());
    log.commit({entries[1]}, h);
    EXPECT_THROW(log.commit({entries[0]}, h), OrderViolation);
    EXPECT_THROW(log.commit({entries[1]}, h), OrderViolation);
    EXPECT_EQ(log.entries().size(), 1U);
}

TEST(Log, TiesBreakOnWhitenedSignature)
{
    CommitEntry a;
    CommitEntry c;
    a.round_received = c.round_received = 3;
    a.consensus_timestamp = c.consensus_timestamp = 7;
    a.whitened.bytes[0] = 1;
    c.whitened.bytes[0] = 2;
    EXPECT_LT(a.key(), c.key());
}
