#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blueice/bus.hpp"
#include "blueice/config.hpp"
#include "blueice/recorder.hpp"
#include "blueice/timesync.hpp"

namespace blueice {

using ConnId = std::uint64_t;

/// An envelope the host must write to a connection; `close` ends the connection afterwards.
struct Outgoing {
    ConnId conn = 0;
    Envelope envelope;
    bool close = false;
};

enum class RunState { Waiting, Running, Finished, Aborted };

/// Process exit statuses of `blueice run`.
enum class ExitStatus : int { Success = 0, Usage = 1, Config = 2, ProtocolAbort = 3, Watchdog = 4, Io = 5 };

struct AbortInfo {
    ExitStatus status = ExitStatus::Success;
    std::string code;  // wire error code that triggered the abort
    std::string reason;
    std::vector<std::string> federates;  // culprits or laggards
};

/// The coordinator's serialized event processor: handshake, routing, barrier,
/// delay scheduling and recording. Transport-agnostic; hosts feed it events in
/// one thread and write back whatever it returns.
class Coordinator {
public:
    /// `recorder` may be null.
    Coordinator(const FederationConfig& config, Recorder* recorder);

    std::vector<Outgoing> on_envelope(ConnId conn, const Envelope& envelope);
    /// Framing failure on `conn` (MSG_TOO_BIG, BAD_MSG).
    std::vector<Outgoing> on_frame_error(ConnId conn, const std::string& code, const std::string& detail);
    std::vector<Outgoing> on_disconnect(ConnId conn);
    /// Aborts with a stall report if the open barrier (or, before tick 0, the join
    /// phase) has waited longer than the timeout.
    std::vector<Outgoing> on_watchdog(double waited_s);
    /// Host-detected failure outside the wire (e.g. a launched federate process exited).
    std::vector<Outgoing> on_external_failure(const std::string& code, const std::string& reason,
                                              std::vector<std::string> federates);

    RunState state() const noexcept { return state_; }
    bool done() const noexcept { return state_ == RunState::Finished || state_ == RunState::Aborted; }
    const AbortInfo& abort_info() const noexcept { return abort_; }
    const BarrierState& barrier() const noexcept { return barrier_; }
    std::optional<std::string> federate_of(ConnId conn) const;

    /// Observes every envelope in processing order (inbound = received).
    using TraceHook = std::function<void(bool inbound, ConnId conn, const Envelope& envelope)>;
    void set_trace(TraceHook hook) { trace_ = std::move(hook); }

private:
    std::vector<Outgoing> handle_hello(ConnId conn, const Envelope& hello);
    std::vector<Outgoing> handle_pub(ConnId conn, const std::string& fed, const Envelope& pub);
    std::vector<Outgoing> handle_tick_done(const std::string& fed, const Envelope& done);
    std::vector<Outgoing> start_tick(Tick n);
    std::vector<Outgoing> abort(ExitStatus status, std::string code, std::string reason,
                                std::vector<std::string> federates);
    void record(const Envelope& e);
    void flush_inbound();
    std::vector<Outgoing> emit(std::vector<Outgoing> out);

    const FederationConfig& config_;
    Recorder* recorder_;
    Bus bus_;
    BarrierState barrier_;
    DeliveryQueue queue_;
    RunState state_ = RunState::Waiting;
    AbortInfo abort_;
    std::map<ConnId, std::string> sessions_;
    std::map<std::string, ConnId> conns_;
    std::map<std::string, std::uint64_t> last_seq_;
    std::map<std::string, std::vector<Envelope>> inbound_;  // this tick's PUB/TICK_DONE per federate
    TraceHook trace_;
};

}  // namespace blueice
