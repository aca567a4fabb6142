#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "blueice/coordinator.hpp"
#include "blueice/federate.hpp"

namespace blueice {

struct LocalOptions {
    /// When set, every message (both directions) gets a random virtual latency
    /// from this seed, per-connection FIFO preserved; otherwise zero-latency FIFO.
    std::optional<std::uint64_t> jitter_seed;
    double max_latency = 1.0;
    double max_response_delay = 5.0;
};

struct LocalResult {
    RunState state = RunState::Waiting;
    AbortInfo abort;
};

/// Runs a whole federation in one process without sockets: the same coordinator
/// fed by a virtual-time message scheduler.
LocalResult run_local(const FederationConfig& config, const std::map<std::string, FederateLogic*>& logics,
                      Recorder* recorder, const LocalOptions& options = {},
                      Coordinator::TraceHook trace = {});

}  // namespace blueice
