#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "blueice/clock.hpp"
#include "blueice/envelope.hpp"

namespace blueice {

/// Delivery tick for a message sent during `send_tick` with the given latency:
/// send_tick + max(1, ceil(delay_ms / tick_size_ms)). Throws ConfigError on a
/// negative delay or non-positive tick size.
Tick schedule(Tick send_tick, double delay_ms, double tick_size_ms);

/// A routed message waiting for its delivery tick.
struct DeliveryRecord {
    Envelope envelope;  // kind=DELIVER
    std::string dest;
    Tick send_tick = 0;
    Tick delivery_tick = 0;
    double delay_ms = 0.0;
};

/// Total order (delivery_tick, topic, source, seq, dest).
bool delivery_before(const DeliveryRecord& a, const DeliveryRecord& b);

/// Pending deliveries, drained tick by tick in a total deterministic order.
class DeliveryQueue {
public:
    void push(DeliveryRecord record);

    /// Removes and returns every record due at `tick` (and any overdue), in order.
    std::vector<DeliveryRecord> drain(Tick tick);

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

private:
    struct Less {
        bool operator()(const DeliveryRecord& a, const DeliveryRecord& b) const {
            return delivery_before(a, b);
        }
    };
    std::multiset<DeliveryRecord, Less> records_;
};

/// Per-tick barrier bookkeeping.
class BarrierState {
public:
    BarrierState() = default;
    explicit BarrierState(std::set<std::string> participants);

    Tick tick() const noexcept { return tick_; }
    bool open() const noexcept { return open_; }
    const std::set<std::string>& pending() const noexcept { return pending_; }
    const std::set<std::string>& participants() const noexcept { return participants_; }
    bool complete() const noexcept { return open_ && pending_.empty(); }

    /// Opens the barrier for tick n: pending := participants.
    void reset(Tick n);

    /// Throws ProtocolError "TICK_MISMATCH" / "DUP_DONE" / "UNKNOWN_ID".
    void on_tick_done(const std::string& federate, Tick n);

private:
    Tick tick_ = 0;
    bool open_ = false;
    std::set<std::string> participants_;
    std::set<std::string> pending_;
};

/// Output of begin_tick for one federate: its due deliveries followed by TICK.
struct TickBatch {
    std::string federate;
    std::vector<Envelope> envelopes;
};

/// Drains deliveries due at n, groups them per participant (lexicographic),
/// appends TICK(n) to each group, and resets the barrier.
std::vector<TickBatch> begin_tick(Tick n, DeliveryQueue& queue, BarrierState& barrier);

struct StallReport {
    Tick tick = 0;
    std::vector<std::string> laggards;
    double waited_s = 0.0;
};

/// Liveness check; wall time is an input here and never touches simulated time.
std::optional<StallReport> watchdog(const BarrierState& state, double waited_s, double wall_timeout_s);

}  // namespace blueice
