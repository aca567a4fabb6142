#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blueice/clock.hpp"
#include "blueice/envelope.hpp"

namespace blueice {

/// One message a federate wants published during the current tick.
struct Publication {
    std::string topic;
    Value payload;
    std::optional<std::uint64_t> seq;  // replay keeps original sequence numbers
};

/// Simulator-side callbacks. on_tick receives every DELIVER due at `tick`, in
/// coordinator drain order, and returns what to publish before TICK_DONE.
class FederateLogic {
public:
    virtual ~FederateLogic() = default;

    /// Called with the WELCOME payload; throwing refuses to start.
    virtual void on_welcome(const Value& /*welcome*/) {}
    virtual std::vector<Publication> on_tick(Tick tick, const std::vector<Envelope>& deliveries) = 0;
    /// Non-fatal ERROR replies (FORBIDDEN, NO_TOPIC).
    virtual void on_error(const Envelope& /*error*/) {}
};

/// Assigns per-source sequence numbers: automatic, or explicit when given.
class SeqCounter {
public:
    std::uint64_t next(std::optional<std::uint64_t> requested) {
        const std::uint64_t s = requested.value_or(next_);
        next_ = s + 1;
        return s;
    }

private:
    std::uint64_t next_ = 0;
};

bool is_fatal_error(const Envelope& error);

}  // namespace blueice
