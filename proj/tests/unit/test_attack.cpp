#include "hashgraph/attack.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace hashgraph;
using namespace hashgraph::attack;

namespace {

sim::Simulation fresh(std::uint32_t n, int coin_period = 10, std::uint64_t seed = 1)
{
    sim::SimConfig cfg;
    cfg.n = n;
    cfg.coin_period = coin_period;
    cfg.seed = seed;
    sim::SimOptions opts;
    opts.record_trace = false;
    return sim::Simulation(cfg, opts);
}

EventId genesis_of(const sim::Simulation& s, PartyId p)
{
    return s.observer().id_at(s.observer().by_creator(p).front());
}

void expect_undecided_everywhere(const sim::Simulation& s, const EventId& x)
{
    for (const auto& p : s.parties()) {
        const auto i = p.graph.find(x);
        if (i) {
            EXPECT_EQ(p.graph.meta_at(*i).fame, Fame::Undecided) << "party " << p.id;
        }
    }
}

}  // namespace

TEST(Attack, RefusesFewerThanSevenParties)
{
    auto s = fresh(6);
    EXPECT_THROW(run_base_case(s, genesis_of(s, 0)), PreconditionViolated);
}

TEST(Attack, Labeling)
{
    const auto l = label_by_votes({true, false, true, false, false, true, false});
    EXPECT_FALSE(l.v);
    EXPECT_EQ(l.cv, 4U);
    EXPECT_EQ(l.perm, (std::vector<PartyId>{1, 3, 4, 6, 0, 2, 5}));
    EXPECT_EQ(l.party(1), 1U);
    const auto tie = label_by_votes({true, true, false, false});
    EXPECT_TRUE(tie.v);
}

TEST(Attack, MinorityQuorum)
{
    // n = 7, q = 5: the three minority voters plus two others form a quorum
    EXPECT_TRUE(minority_quorum_exists({true, true, true, false, false, false, false}));
    EXPECT_TRUE(minority_quorum_exists({true, true, true, true, false, false, false}));
    // n = 9, q = 7: three yes-voters cannot carry a quorum of seven
    EXPECT_FALSE(minority_quorum_exists({true, true, true, false, false, false, false, false, false}));
    EXPECT_TRUE(minority_quorum_exists({true, true, true, true, false, false, false, false, false}));
}

TEST(Attack, BaseCaseSplitsVotes)
{
    for (std::uint32_t n : {7U, 8U, 9U, 10U, 12U, 13U}) {
        auto s = fresh(n);
        const auto x = genesis_of(s, 0);
        const auto phase = run_base_case(s, x);
        EXPECT_EQ(phase.yes(), n / 2) << "n=" << n;
        EXPECT_EQ(phase.no(), n - n / 2);
        EXPECT_LT(phase.yes(), consensus::quorum(n));
        EXPECT_LT(phase.no(), consensus::quorum(n));
        EXPECT_EQ(phase.labeling.party(1), 0U);
        EXPECT_TRUE(mutual_sightings(s.observer(), phase.round).empty());
        EXPECT_FALSE(s.observer().meta(phase.anchors.at("A")).is_witness);
        EXPECT_FALSE(s.observer().meta(phase.anchors.at("B")).is_witness);
        expect_undecided_everywhere(s, x);
    }
}

TEST(Attack, BaseCaseStrongSightingsOfSeven)
{
    auto s = fresh(7);
    const auto phase = run_base_case(s, genesis_of(s, 0));
    const auto& h = s.observer();
    const auto& L = phase.labeling;
    auto strongly_seen_creators = [&](const EventId& e) {
        std::vector<std::uint32_t> labels;
        for (std::uint32_t w : h.witnesses(phase.target_round))
            if (h.strongly_sees(h.index_of(e), w))
                for (std::uint32_t l = 1; l <= 7; ++l)
                    if (L.party(l) == h.creator_at(w)) labels.push_back(l);
        std::sort(labels.begin(), labels.end());
        return labels;
    };
    EXPECT_EQ(strongly_seen_creators(phase.anchors.at("A")), (std::vector<std::uint32_t>{6, 7}));
    EXPECT_EQ(strongly_seen_creators(phase.anchors.at("B")), (std::vector<std::uint32_t>{7}));
}

TEST(Attack, InductiveStepPreservesVotes)
{
    for (std::uint32_t n : {7U, 10U, 13U}) {
        auto s = fresh(n);
        const auto x = genesis_of(s, 1);
        auto phase = run_base_case(s, x);
        for (int step = 0; step < 6; ++step) {
            auto next = run_inductive_step(s, phase);
            ASSERT_FALSE(next.coin);
            EXPECT_EQ(next.votes, phase.votes) << "n=" << n << " round " << next.round;
            EXPECT_TRUE(mutual_sightings(s.observer(), next.round).empty());
            for (const char* a : {"A", "B", "C", "D"}) EXPECT_FALSE(s.observer().meta(next.anchors.at(a)).is_witness);
            expect_undecided_everywhere(s, x);
            phase = std::move(next);
        }
    }
}

TEST(Attack, CoinRoundVotesFollowMiddleBits)
{
    auto s = fresh(7, 2, 5);
    const auto x = genesis_of(s, 0);
    const auto base = run_base_case(s, x);
    const auto coin = run_inductive_step(s, base);
    ASSERT_TRUE(coin.coin);
    auto& h = s.observer();
    for (std::uint32_t p = 0; p < 7; ++p) {
        const std::uint32_t w = h.index_of(coin.witnesses[p]);
        std::uint32_t yes = 0;
        const auto& seen = consensus::strongly_seen_previous_witnesses(h, w);
        for (std::uint32_t prev : seen) yes += consensus::vote(h, h.index_of(x), prev, s.coin_period()).value ? 1 : 0;
        const auto no = static_cast<std::uint32_t>(seen.size()) - yes;
        if (!consensus::is_supermajority(yes, 7) && !consensus::is_supermajority(no, 7)) {
            EXPECT_EQ(coin.votes[p], middle_bit(h.event_at(w).signature));
        }
    }
}

TEST(Attack, DelayRunDecidesSoonAfterSupermajority)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto s = fresh(7, 10, seed);
        const auto stats = run_delay_attack(s, genesis_of(s, 0), 200);
        EXPECT_TRUE(stats.failures.empty()) << stats.failures.front();
        ASSERT_TRUE(stats.supermajority_round);
        ASSERT_TRUE(stats.decided_at);
        ASSERT_TRUE(stats.fame);
        EXPECT_NE(*stats.fame, Fame::Undecided);
        EXPECT_GE(stats.coin_rounds_elapsed, 1);
        EXPECT_EQ(stats.per_coin_round_yes_counts.size(), static_cast<std::size_t>(stats.coin_rounds_elapsed));
        EXPECT_GE(*stats.overhead(), 0);
        EXPECT_LE(*stats.overhead(), 3);
        // votes before the first coin round never reach a decision
        EXPECT_GE(*stats.supermajority_round - stats.target_round, 10);
        for (PartyId p = 0; p < 7; ++p) EXPECT_TRUE(s.observer().forks_by(p).empty());
    }
}

TEST(Attack, StatsRow)
{
    DelayStats st;
    st.target_round = 1;
    st.rounds_elapsed = 21;
    st.coin_rounds_elapsed = 2;
    st.decided_at = 22;
    st.supermajority_round = 21;
    st.fame = Fame::Famous;
    st.per_coin_round_yes_counts = {4, 6};
    EXPECT_EQ(stats_csv_row(1, 7, 10, st), "1,7,10,1,21,2,22,21,1,,famous,4;6");
}
