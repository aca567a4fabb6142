#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <string>

#include "blueice/coordinator.hpp"
#include "blueice/wire.hpp"

namespace blueice {

struct ServeOptions {
    /// Sleep so tick n starts no earlier than n * tick_size_ms after tick 0.
    bool pace = false;
    /// Polled from the event loop; a returned (federate, reason) aborts the run.
    std::function<std::optional<std::pair<std::string, std::string>>()> health_check;
    /// Called from the event loop for every envelope the coordinator processes.
    Coordinator::TraceHook trace;
};

struct ServeResult {
    ExitStatus status = ExitStatus::Success;
    AbortInfo abort;
    Tick ticks_completed = 0;
};

/// Hosts a coordinator on `listener` until the run finishes or aborts. One reader
/// thread per connection feeds a single serialized event loop; the watchdog runs
/// off the same loop.
ServeResult serve(const FederationConfig& config, Recorder* recorder, Listener& listener,
                  const ServeOptions& options = {});

}  // namespace blueice
