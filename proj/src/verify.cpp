#include "hashgraph/verify.hpp"

#include "hashgraph/consensus.hpp"

#include <map>
#include <memory>
#include <type_traits>

namespace hashgraph::verify {

namespace {

std::string where(const sim::TraceRecord& r)
{
    std::string s = std::string(sim::to_string(r.kind)) + " at step " + std::to_string(r.step);
    if (r.party) s += " party " + std::to_string(*r.party);
    if (r.event) s += " event " + r.event->hex();
    return s;
}

template <class T>
std::string show(const std::optional<T>& v)
{
    if (!v) return "none";
    if constexpr (std::is_same_v<T, Fame>)
        return to_string(*v);
    else
        return std::to_string(*v);
}

}  // namespace

VerifyResult verify_trace(const std::vector<sim::TraceRecord>& records)
{
    VerifyResult out;
    out.records = records.size();
    if (records.empty()) return out;

    auto fail = [&](std::size_t i, std::string what) {
        out.mismatch = Mismatch{i + 1, where(records[i]) + ": " + std::move(what)};
        return out;
    };

    const sim::TraceRecord& header = records.front();
    if (header.kind != sim::RecordKind::Config || !header.n || !header.seed || !header.coin_period)
        return fail(0, "trace does not start with a Config record");
    const consensus::CoinPeriod coin(*header.coin_period);
    Hashgraph h(std::make_shared<const Pki>(*header.n, *header.seed), 0);

    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.kind != sim::RecordKind::Created) continue;
        if (!r.payload || !r.event) return fail(i, "Created record without an event payload");
        const InsertResult ins = h.insert(*r.payload);
        if (ins.status == InsertStatus::Duplicate) continue;
        if (ins.status != InsertStatus::Inserted) return fail(i, std::string("event rejected: ") + to_string(ins.status));
        if (ins.id != *r.event) return fail(i, "recorded id differs from the payload digest " + ins.id.hex());
        const DerivedMeta& m = h.meta_at(ins.index);
        if (r.round && *r.round != m.round)
            return fail(i, "round " + std::to_string(*r.round) + " recomputed as " + std::to_string(m.round));
        if (r.witness && *r.witness != m.is_witness) return fail(i, "witness flag differs");
        ++out.events;
    }

    consensus::decide_fame(h, coin);
    const auto order = consensus::find_order(h);
    std::map<EventId, std::size_t> position;
    for (std::size_t k = 0; k < order.size(); ++k) position.emplace(order[k].event, k);
    std::map<PartyId, std::size_t> committed;

    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.kind != sim::RecordKind::FameDecided && r.kind != sim::RecordKind::Committed) continue;
        if (!r.event || !r.party) return fail(i, "record without party or event");
        const auto idx = h.find(*r.event);
        if (!idx) return fail(i, "event never created");
        const DerivedMeta& m = h.meta_at(*idx);
        if (r.kind == sim::RecordKind::FameDecided) {
            if (!r.fame || *r.fame != m.fame) return fail(i, "fame " + show(r.fame) + " recomputed as " + to_string(m.fame));
            if (r.round && *r.round != m.round) return fail(i, "witness round differs");
            continue;
        }
        if (r.round_received != m.round_received)
            return fail(i, "roundReceived " + show(r.round_received) + " recomputed as " + show(m.round_received));
        if (r.consensus_timestamp != m.consensus_timestamp)
            return fail(i, "consensus timestamp " + show(r.consensus_timestamp) + " recomputed as " +
                               show(m.consensus_timestamp));
        std::size_t& k = committed[*r.party];
        const auto pos = position.find(*r.event);
        if (pos == position.end() || pos->second != k)
            return fail(i, "committed out of the recomputed order at position " + std::to_string(k));
        ++k;
    }
    return out;
}

}  // namespace hashgraph::verify
