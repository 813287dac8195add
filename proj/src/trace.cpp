#include "hashgraph/trace.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <stdexcept>

namespace hashgraph::sim {

using Json = nlohmann::ordered_json;

const char* to_string(RecordKind k) noexcept
{
    switch (k) {
    case RecordKind::Config: return "Config";
    case RecordKind::Created: return "Created";
    case RecordKind::Delivered: return "Delivered";
    case RecordKind::Buffered: return "Buffered";
    case RecordKind::Committed: return "Committed";
    case RecordKind::FameDecided: return "FameDecided";
    case RecordKind::VoteTally: return "VoteTally";
    }
    return "?";
}

namespace {

RecordKind kind_from(const std::string& s)
{
    for (auto k : {RecordKind::Config, RecordKind::Created, RecordKind::Delivered, RecordKind::Buffered,
                   RecordKind::Committed, RecordKind::FameDecided, RecordKind::VoteTally})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown trace record kind: " + s);
}

Fame fame_from(const std::string& s)
{
    for (auto f : {Fame::Undecided, Fame::Famous, Fame::NotFamous})
        if (s == to_string(f)) return f;
    throw std::invalid_argument("unknown fame: " + s);
}

std::string to_hex(const Bytes& b)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (auto byte : b) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0x0F]);
    }
    return out;
}

Bytes from_hex(const std::string& s)
{
    if (s.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
        throw std::invalid_argument("bad hex digit");
    };
    Bytes out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>((nibble(s[2 * i]) << 4) | nibble(s[2 * i + 1]));
    return out;
}

template <class T>
void put(Json& j, const char* key, const std::optional<T>& v)
{
    if (v) j[key] = *v;
}

template <class T>
std::optional<T> get(const Json& j, const char* key)
{
    if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<T>();
    return std::nullopt;
}

}  // namespace

std::string to_json_line(const TraceRecord& r)
{
    Json j;
    j["step"] = r.step;
    j["kind"] = to_string(r.kind);
    put(j, "party", r.party);
    if (r.event) j["event"] = r.event->hex();
    put(j, "round", r.round);
    if (r.fame) j["fame"] = to_string(*r.fame);
    put(j, "roundReceived", r.round_received);
    put(j, "consensusTimestamp", r.consensus_timestamp);
    put(j, "witness", r.witness);
    if (r.payload) {
        const Event& e = *r.payload;
        j["creator"] = e.creator;
        j["timestamp"] = e.timestamp;
        j["selfParent"] = e.self_parent ? Json(e.self_parent->hex()) : Json(nullptr);
        j["otherParent"] = e.other_parent ? Json(e.other_parent->hex()) : Json(nullptr);
        Json txs = Json::array();
        for (const auto& tx : e.transactions) txs.push_back(to_hex(tx));
        j["tx"] = std::move(txs);
        j["signature"] = e.signature.hex();
    }
    put(j, "sender", r.sender);
    put(j, "delivery", r.delivery);
    put(j, "yes", r.yes);
    put(j, "no", r.no);
    put(j, "coin", r.coin);
    put(j, "n", r.n);
    put(j, "corrupted", r.corrupted);
    put(j, "coinPeriod", r.coin_period);
    put(j, "seed", r.seed);
    put(j, "scheduler", r.scheduler);
    return j.dump();
}

TraceRecord parse_json_line(const std::string& line)
{
    const Json j = Json::parse(line);
    TraceRecord r;
    r.step = j.at("step").get<std::uint64_t>();
    r.kind = kind_from(j.at("kind").get<std::string>());
    r.party = get<PartyId>(j, "party");
    if (auto ev = get<std::string>(j, "event")) r.event = EventId::from_hex(*ev);
    r.round = get<int>(j, "round");
    if (auto f = get<std::string>(j, "fame")) r.fame = fame_from(*f);
    r.round_received = get<int>(j, "roundReceived");
    r.consensus_timestamp = get<std::int64_t>(j, "consensusTimestamp");
    r.witness = get<bool>(j, "witness");
    if (r.kind == RecordKind::Created && j.contains("signature")) {
        Event e;
        e.creator = j.at("creator").get<PartyId>();
        e.timestamp = j.at("timestamp").get<std::int64_t>();
        if (auto sp = get<std::string>(j, "selfParent")) e.self_parent = EventId::from_hex(*sp);
        if (auto op = get<std::string>(j, "otherParent")) e.other_parent = EventId::from_hex(*op);
        for (const auto& tx : j.at("tx")) e.transactions.push_back(from_hex(tx.get<std::string>()));
        e.signature = Signature::from_hex(j.at("signature").get<std::string>());
        r.payload = std::move(e);
    }
    r.sender = get<PartyId>(j, "sender");
    r.delivery = get<std::uint64_t>(j, "delivery");
    r.yes = get<std::uint32_t>(j, "yes");
    r.no = get<std::uint32_t>(j, "no");
    r.coin = get<bool>(j, "coin");
    r.n = get<std::uint32_t>(j, "n");
    r.corrupted = get<std::vector<PartyId>>(j, "corrupted");
    r.coin_period = get<int>(j, "coinPeriod");
    r.seed = get<std::uint64_t>(j, "seed");
    r.scheduler = get<std::string>(j, "scheduler");
    return r;
}

void Trace::write_jsonl(std::ostream& out) const
{
    for (const auto& r : records_) out << to_json_line(r) << '\n';
}

std::vector<TraceRecord> Trace::read_jsonl(std::istream& in)
{
    std::vector<TraceRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_json_line(line));
    }
    return out;
}

void write_dot(const Hashgraph& h, std::ostream& out)
{
    out << "digraph hashgraph {\n  rankdir=BT;\n  node [fontname=\"monospace\"];\n";
    for (std::uint32_t i = 0; i < h.size(); ++i) {
        const DerivedMeta& m = h.meta_at(i);
        out << "  e" << i << " [label=\"" << h.creator_at(i) << ':' << m.round << "\"";
        if (m.is_witness) out << " shape=box";
        if (m.fame == Fame::Famous) out << " style=filled fillcolor=gold";
        if (m.fame == Fame::NotFamous) out << " style=dashed";
        out << "];\n";
    }
    for (std::uint32_t i = 0; i < h.size(); ++i) {
        if (h.self_parent_at(i) == Hashgraph::npos) continue;
        out << "  e" << i << " -> e" << h.self_parent_at(i) << " [weight=4];\n";
        out << "  e" << i << " -> e" << h.other_parent_at(i) << " [style=dotted];\n";
    }
    out << "}\n";
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out)
{
    out << kMetricsHeader << '\n';
    for (const auto& r : rows)
        out << r.seed << ',' << r.n << ',' << r.t << ',' << r.steps << ',' << r.committed_tx << ',' << r.max_round
            << '\n';
}

}  // namespace hashgraph::sim
