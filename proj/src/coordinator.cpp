#include "blueice/coordinator.hpp"

#include "blueice/error.hpp"
#include "blueice/wire.hpp"

namespace blueice {

Coordinator::Coordinator(const FederationConfig& config, Recorder* recorder)
    : config_(config), recorder_(recorder), bus_(config) {
    std::set<std::string> ids;
    for (const auto& f : config_.federates) ids.insert(f.id);
    barrier_ = BarrierState(std::move(ids));
}

std::optional<std::string> Coordinator::federate_of(ConnId conn) const {
    auto it = sessions_.find(conn);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

std::vector<Outgoing> Coordinator::emit(std::vector<Outgoing> out) {
    if (trace_) {
        for (const auto& o : out) trace_(false, o.conn, o.envelope);
    }
    return out;
}

void Coordinator::record(const Envelope& e) {
    if (recorder_) recorder_->record(e);
}

void Coordinator::flush_inbound() {
    // Arrival order across connections is not reproducible; order within a federate is.
    for (auto& [fed, envs] : inbound_) {
        for (const auto& e : envs) record(e);
        envs.clear();
    }
}

std::vector<Outgoing> Coordinator::on_envelope(ConnId conn, const Envelope& envelope) {
    if (trace_) trace_(true, conn, envelope);
    if (done()) return {};
    try {
        auto sess = sessions_.find(conn);
        if (sess == sessions_.end()) return emit(handle_hello(conn, envelope));
        const std::string fed = sess->second;
        switch (envelope.kind) {
            case Kind::Pub: return emit(handle_pub(conn, fed, envelope));
            case Kind::TickDone: return emit(handle_tick_done(fed, envelope));
            case Kind::Bye: return emit(on_disconnect(conn));
            default:
                return emit(abort(ExitStatus::ProtocolAbort, "UNEXPECTED_KIND",
                                  "unexpected " + std::string(to_string(envelope.kind)) + " from '" + fed + "'",
                                  {fed}));
        }
    } catch (const IoError& e) {
        return emit(abort(ExitStatus::Io, "IO", e.what(), {}));
    }
}

std::vector<Outgoing> Coordinator::handle_hello(ConnId conn, const Envelope& hello) {
    if (hello.kind != Kind::Hello) {
        return {{conn, make_error(hello.federate, "NOT_HELLO", "first envelope must be HELLO"), true}};
    }
    Envelope reply = handshake(hello, config_, bus_, state_ != RunState::Waiting);
    if (reply.kind == Kind::Error) return {{conn, std::move(reply), true}};

    sessions_[conn] = hello.federate;
    conns_[hello.federate] = conn;
    std::vector<Outgoing> out{{conn, std::move(reply), false}};
    if (bus_.registered().size() == config_.federates.size()) {
        state_ = RunState::Running;
        auto more = start_tick(0);
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    return out;
}

std::vector<Outgoing> Coordinator::handle_pub(ConnId conn, const std::string& fed, const Envelope& pub) {
    if (state_ != RunState::Running)
        return {{conn, make_error(fed, "NOT_RUNNING", "publication before the run started"), false}};
    if (pub.federate != fed)
        return abort(ExitStatus::ProtocolAbort, "BAD_SENDER",
                     "'" + fed + "' published as '" + pub.federate + "'", {fed});
    try {
        if (!bus_.authorize_publish(fed, pub.topic)) {
            return {{conn, make_error(fed, "FORBIDDEN", "'" + fed + "' may not publish on '" + pub.topic + "'"),
                     false}};
        }
    } catch (const ProtocolError& e) {
        return {{conn, make_error(fed, e.code(), e.what()), false}};
    }
    if (pub.tick != barrier_.tick())
        return abort(ExitStatus::ProtocolAbort, "TICK_MISMATCH",
                     "PUB for tick " + std::to_string(pub.tick) + " from '" + fed + "' while barrier is at tick " +
                         std::to_string(barrier_.tick()),
                     {fed});
    if (!barrier_.pending().contains(fed))
        return abort(ExitStatus::ProtocolAbort, "LATE_PUB",
                     "PUB from '" + fed + "' after its TICK_DONE(" + std::to_string(barrier_.tick()) + ")", {fed});
    if (auto it = last_seq_.find(fed); it != last_seq_.end() && pub.seq <= it->second)
        return abort(ExitStatus::ProtocolAbort, "BAD_SEQ",
                     "non-increasing seq " + std::to_string(pub.seq) + " from '" + fed + "'", {fed});
    last_seq_[fed] = pub.seq;

    std::vector<DeliveryRecord> records;
    try {
        records = bus_.route(pub);
    } catch (const ConfigError& e) {
        return abort(ExitStatus::Config, "CONFIG", e.what(), {fed});
    }
    for (auto& r : records) queue_.push(std::move(r));
    inbound_[fed].push_back(pub);
    return {};
}

std::vector<Outgoing> Coordinator::handle_tick_done(const std::string& fed, const Envelope& done) {
    if (state_ != RunState::Running)
        return abort(ExitStatus::ProtocolAbort, "TICK_MISMATCH", "TICK_DONE before the run started", {fed});
    if (done.federate != fed)
        return abort(ExitStatus::ProtocolAbort, "BAD_SENDER", "'" + fed + "' sent TICK_DONE as '" + done.federate + "'",
                     {fed});
    try {
        barrier_.on_tick_done(fed, done.tick);
    } catch (const ProtocolError& e) {
        return abort(ExitStatus::ProtocolAbort, e.code(), e.what(), {fed});
    }
    inbound_[fed].push_back(done);
    if (!barrier_.complete()) return {};

    flush_inbound();
    const Tick next = barrier_.tick() + 1;
    if (next >= config_.max_ticks) {
        state_ = RunState::Finished;
        if (recorder_) recorder_->flush();
        std::vector<Outgoing> out;
        for (const auto& [id, conn] : conns_) out.push_back({conn, make_bye(id, next), true});
        return out;
    }
    return start_tick(next);
}

std::vector<Outgoing> Coordinator::start_tick(Tick n) {
    if (n >= config_.max_ticks) {
        state_ = RunState::Finished;
        std::vector<Outgoing> out;
        for (const auto& [id, conn] : conns_) out.push_back({conn, make_bye(id, n), true});
        return out;
    }
    std::vector<Outgoing> out;
    for (auto& batch : begin_tick(n, queue_, barrier_)) {
        const ConnId conn = conns_.at(batch.federate);
        for (auto& e : batch.envelopes) {
            record(e);
            out.push_back({conn, std::move(e), false});
        }
    }
    return out;
}

std::vector<Outgoing> Coordinator::abort(ExitStatus status, std::string code, std::string reason,
                                         std::vector<std::string> federates) {
    state_ = RunState::Aborted;
    abort_ = {status, code, std::move(reason), std::move(federates)};
    try {
        flush_inbound();
        if (recorder_) recorder_->flush();
    } catch (const IoError&) {
    }
    std::vector<Outgoing> out;
    for (const auto& [id, conn] : conns_) out.push_back({conn, make_error(id, code, abort_.reason), true});
    return out;
}

std::vector<Outgoing> Coordinator::on_frame_error(ConnId conn, const std::string& code, const std::string& detail) {
    if (done()) return {};
    auto sess = sessions_.find(conn);
    if (sess == sessions_.end()) return emit({{conn, make_error("", code, detail), true}});
    return emit(abort(ExitStatus::ProtocolAbort, code, "'" + sess->second + "': " + detail, {sess->second}));
}

std::vector<Outgoing> Coordinator::on_disconnect(ConnId conn) {
    if (done()) return {};
    auto sess = sessions_.find(conn);
    if (sess == sessions_.end()) return {};
    return emit(abort(ExitStatus::ProtocolAbort, "DISCONNECT", "federate '" + sess->second + "' disconnected",
                      {sess->second}));
}

std::vector<Outgoing> Coordinator::on_watchdog(double waited_s) {
    if (state_ == RunState::Waiting) {
        if (waited_s <= config_.tick_timeout_s) return {};
        std::vector<std::string> missing;
        for (const auto& f : config_.federates) {
            if (!bus_.is_registered(f.id)) missing.push_back(f.id);
        }
        std::string names;
        for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
        return emit(abort(ExitStatus::Watchdog, "WATCHDOG", "federates never joined: " + names, missing));
    }
    if (state_ != RunState::Running) return {};
    auto report = watchdog(barrier_, waited_s, config_.tick_timeout_s);
    if (!report) return {};
    std::string names;
    for (const auto& l : report->laggards) names += (names.empty() ? "" : ", ") + l;
    return emit(abort(ExitStatus::Watchdog, "WATCHDOG",
                      "tick " + std::to_string(report->tick) + " stalled; waiting on: " + names, report->laggards));
}

std::vector<Outgoing> Coordinator::on_external_failure(const std::string& code, const std::string& reason,
                                                       std::vector<std::string> federates) {
    if (done()) return {};
    return emit(abort(ExitStatus::ProtocolAbort, code, reason, std::move(federates)));
}

}  // namespace blueice
