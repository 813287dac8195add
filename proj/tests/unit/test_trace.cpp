#include "hashgraph/simnet.hpp"
#include "hashgraph/trace.hpp"
#include "hashgraph/verify.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <sstream>

using namespace hashgraph;
using namespace hashgraph::sim;

namespace {

Simulation finished_run(std::uint32_t n, std::vector<PartyId> corrupted, std::uint64_t seed)
{
    SimConfig cfg;
    cfg.n = n;
    cfg.corrupted = std::move(corrupted);
    cfg.seed = seed;
    cfg.tx_injection = default_tx_schedule(cfg);
    Simulation s(cfg);
    FairScheduler f(seed);
    s.run_until_committed(f);
    return s;
}

std::vector<TraceRecord> reparse(const Trace& t)
{
    std::stringstream io;
    t.write_jsonl(io);
    return Trace::read_jsonl(io);
}

}  // namespace

TEST(TraceFormat, StableFieldNames)
{
    TraceRecord r;
    r.step = 4;
    r.kind = RecordKind::FameDecided;
    r.party = 2;
    r.event = hash_bytes(Bytes{1});
    r.round = 3;
    r.fame = Fame::NotFamous;
    const auto j = nlohmann::json::parse(to_json_line(r));
    EXPECT_EQ(j["step"], 4);
    EXPECT_EQ(j["kind"], "FameDecided");
    EXPECT_EQ(j["party"], 2);
    EXPECT_EQ(j["event"], r.event->hex());
    EXPECT_EQ(j["round"], 3);
    EXPECT_EQ(j["fame"], "not_famous");
    EXPECT_FALSE(j.contains("roundReceived"));
}

TEST(TraceFormat, RecordsRoundTrip)
{
    const auto s = finished_run(4, {}, 2);
    const auto& original = s.trace().records();
    const auto back = reparse(s.trace());
    ASSERT_EQ(back.size(), original.size());
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(to_json_line(back[i]), to_json_line(original[i]));
    EXPECT_EQ(original.front().kind, RecordKind::Config);
}

TEST(TraceFormat, DisabledTraceStaysEmpty)
{
    SimConfig cfg;
    SimOptions opts;
    opts.record_trace = false;
    Simulation s(cfg, opts);
    FairScheduler f(1);
    s.run_for(f, 50);
    EXPECT_TRUE(s.trace().records().empty());
}

TEST(Dot, LabelsAndStyles)
{
    const auto s = finished_run(4, {}, 3);
    std::ostringstream out;
    write_dot(s.party(0).graph, out);
    const std::string dot = out.str();
    EXPECT_EQ(dot.rfind("digraph", 0), 0U);
    EXPECT_NE(dot.find("label=\"0:1\""), std::string::npos);
    EXPECT_NE(dot.find("shape=box"), std::string::npos);
    EXPECT_NE(dot.find("gold"), std::string::npos);
    EXPECT_NE(dot.find("->"), std::string::npos);
}

TEST(Metrics, FixedHeader)
{
    std::ostringstream out;
    write_metrics_csv({MetricsRow{5, 4, 1, 100, 6, 9}}, out);
    EXPECT_EQ(out.str(), "seed,n,t,steps,committedTx,maxRound\n5,4,1,100,6,9\n");
}

TEST(Verify, SimulationTraceIsConsistent)
{
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto s = finished_run(7, {6}, seed);
        const auto result = verify::verify_trace(reparse(s.trace()));
        EXPECT_TRUE(result.ok()) << result.mismatch->what;
        EXPECT_EQ(result.events, s.observer().size());
    }
}

TEST(Verify, EmptyTraceIsVacuous)
{
    EXPECT_TRUE(verify::verify_trace({}).ok());
}

TEST(Verify, MutatedFameIsCaught)
{
    const auto s = finished_run(4, {}, 5);
    auto records = reparse(s.trace());
    std::size_t line = 0;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].kind == RecordKind::FameDecided) {
            records[i].fame = records[i].fame == Fame::Famous ? Fame::NotFamous : Fame::Famous;
            line = i + 1;
            break;
        }
    ASSERT_GT(line, 0U);
    const auto result = verify::verify_trace(records);
    ASSERT_FALSE(result.ok());
    EXPECT_EQ(result.mismatch->line, line);
}

TEST(Verify, MutatedTimestampIsCaught)
{
    const auto s = finished_run(4, {}, 6);
    auto records = reparse(s.trace());
    for (auto& r : records)
        if (r.kind == RecordKind::Committed) {
            *r.consensus_timestamp += 1;
            break;
        }
    EXPECT_FALSE(verify::verify_trace(records).ok());
}
