#pragma once

#include "hashgraph/trace.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hashgraph::verify {

struct Mismatch {
    std::size_t line = 0;  // 1-based record position in the trace
    std::string what;
};

struct VerifyResult {
    std::optional<Mismatch> mismatch;
    std::size_t records = 0;
    std::size_t events = 0;

    [[nodiscard]] bool ok() const noexcept { return !mismatch; }
};

/// Rebuilds the union of all created events from the Created records alone,
/// runs the consensus procedures on it once, and checks every recorded round,
/// fame, received round and consensus timestamp against the result. Each
/// party's committed sequence must also be a prefix of the recomputed order.
VerifyResult verify_trace(const std::vector<sim::TraceRecord>& records);

}  // namespace hashgraph::verify
