#include "blueice/timesync.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include "blueice/error.hpp"

namespace blueice {

Tick schedule(Tick send_tick, double delay_ms, double tick_size_ms) {
    if (!(delay_ms >= 0.0) || !std::isfinite(delay_ms)) throw ConfigError("delay must be finite and non-negative");
    if (!(tick_size_ms > 0.0)) throw ConfigError("tick_size_ms must be positive");
    const double ticks = std::ceil(delay_ms / tick_size_ms);
    const Tick lag = ticks < 1.0 ? 1 : static_cast<Tick>(ticks);
    return send_tick + lag;
}

bool delivery_before(const DeliveryRecord& a, const DeliveryRecord& b) {
    return std::tie(a.delivery_tick, a.envelope.topic, a.envelope.federate, a.envelope.seq, a.dest) <
           std::tie(b.delivery_tick, b.envelope.topic, b.envelope.federate, b.envelope.seq, b.dest);
}

void DeliveryQueue::push(DeliveryRecord record) { records_.insert(std::move(record)); }

std::vector<DeliveryRecord> DeliveryQueue::drain(Tick tick) {
    std::vector<DeliveryRecord> out;
    while (!records_.empty() && records_.begin()->delivery_tick <= tick) {
        auto node = records_.extract(records_.begin());
        out.push_back(std::move(node.value()));
    }
    return out;
}

BarrierState::BarrierState(std::set<std::string> participants)
    : participants_(std::move(participants)) {}

void BarrierState::reset(Tick n) {
    tick_ = n;
    open_ = true;
    pending_ = participants_;
}

void BarrierState::on_tick_done(const std::string& federate, Tick n) {
    if (!participants_.contains(federate))
        throw ProtocolError("UNKNOWN_ID", "TICK_DONE from non-participant '" + federate + "'");
    if (!open_ || n != tick_)
        throw ProtocolError("TICK_MISMATCH", "TICK_DONE(" + std::to_string(n) + ") from '" + federate +
                                                 "' while barrier is at tick " + std::to_string(tick_));
    if (pending_.erase(federate) == 0)
        throw ProtocolError("DUP_DONE", "duplicate TICK_DONE(" + std::to_string(n) + ") from '" + federate + "'");
}

std::vector<TickBatch> begin_tick(Tick n, DeliveryQueue& queue, BarrierState& barrier) {
    std::map<std::string, std::vector<Envelope>> per_dest;
    for (const auto& p : barrier.participants()) per_dest[p];
    for (auto& rec : queue.drain(n)) {
        auto it = per_dest.find(rec.dest);
        if (it != per_dest.end()) it->second.push_back(std::move(rec.envelope));
    }
    std::vector<TickBatch> out;
    out.reserve(per_dest.size());
    for (auto& [fed, envs] : per_dest) {
        envs.push_back(make_tick(fed, n));
        out.push_back({fed, std::move(envs)});
    }
    barrier.reset(n);
    return out;
}

std::optional<StallReport> watchdog(const BarrierState& state, double waited_s, double wall_timeout_s) {
    if (!state.open() || state.pending().empty() || waited_s <= wall_timeout_s) return std::nullopt;
    return StallReport{state.tick(), {state.pending().begin(), state.pending().end()}, waited_s};
}

}  // namespace blueice
