#pragma once

#include "hashgraph/consensus.hpp"
#include "hashgraph/hashgraph.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hashgraph::sim {

enum class RecordKind { Config, Created, Delivered, Buffered, Committed, FameDecided, VoteTally };

const char* to_string(RecordKind k) noexcept;

// One line of the trace stream. Only the fields relevant to the kind are set.
struct TraceRecord {
    std::uint64_t step = 0;
    RecordKind kind = RecordKind::Created;
    std::optional<PartyId> party;
    std::optional<EventId> event;
    std::optional<int> round;
    std::optional<Fame> fame;
    std::optional<int> round_received;
    std::optional<std::int64_t> consensus_timestamp;
    std::optional<bool> witness;
    std::optional<Event> payload;  // Created: the full event
    std::optional<PartyId> sender;  // Delivered
    std::optional<std::uint64_t> delivery;
    std::optional<std::uint32_t> yes;  // VoteTally
    std::optional<std::uint32_t> no;
    std::optional<bool> coin;
    // Config
    std::optional<std::uint32_t> n;
    std::optional<std::vector<PartyId>> corrupted;
    std::optional<int> coin_period;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scheduler;
};

std::string to_json_line(const TraceRecord& r);
TraceRecord parse_json_line(const std::string& line);

class Trace {
public:
    explicit Trace(bool enabled = true) : enabled_(enabled) {}

    [[nodiscard]] bool enabled() const noexcept { return enabled_; }
    void add(TraceRecord r)
    {
        if (enabled_) records_.push_back(std::move(r));
    }
    [[nodiscard]] const std::vector<TraceRecord>& records() const noexcept { return records_; }

    void write_jsonl(std::ostream& out) const;
    static std::vector<TraceRecord> read_jsonl(std::istream& in);

private:
    bool enabled_;
    std::vector<TraceRecord> records_;
};

/// Graphviz rendering of one hashgraph. Nodes are labeled creator:round;
/// witnesses are boxes, famous witnesses are filled.
void write_dot(const Hashgraph& h, std::ostream& out);

struct MetricsRow {
    std::uint64_t seed = 0;
    std::uint32_t n = 0;
    std::uint32_t t = 0;
    std::uint64_t steps = 0;
    std::uint64_t committed_tx = 0;
    int max_round = 0;
};

inline constexpr const char* kMetricsHeader = "seed,n,t,steps,committedTx,maxRound";

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out);

}  // namespace hashgraph::sim
