#include "blueice/local.hpp"

#include <queue>
#include <tuple>

#include "blueice/canonical.hpp"
#include "blueice/prng.hpp"

namespace blueice {
namespace {

struct Message {
    double time;
    std::uint64_t order;
    bool to_coordinator;
    ConnId conn;
    Envelope envelope;
    bool close = false;

    bool operator>(const Message& o) const { return std::tie(time, order) > std::tie(o.time, o.order); }
};

struct Peer {
    std::string id;
    FederateLogic* logic = nullptr;
    SeqCounter seq;
    std::vector<Envelope> deliveries;
    bool finished = false;
    double up_clock = 0.0;    // FIFO horizon federate -> coordinator
    double down_clock = 0.0;  // FIFO horizon coordinator -> federate
};

}  // namespace

LocalResult run_local(const FederationConfig& config, const std::map<std::string, FederateLogic*>& logics,
                      Recorder* recorder, const LocalOptions& options, Coordinator::TraceHook trace) {
    Coordinator coord(config, recorder);
    if (trace) coord.set_trace(std::move(trace));

    std::optional<PrngState> rng;
    if (options.jitter_seed) rng = PrngState{*options.jitter_seed};
    auto jitter = [&](double scale) { return rng ? prng_uniform(*rng) * scale : 0.0; };

    std::priority_queue<Message, std::vector<Message>, std::greater<>> pending;
    std::uint64_t order = 0;
    std::map<ConnId, Peer> peers;
    double now = 0.0;

    auto send_up = [&](Peer& peer, ConnId conn, Envelope e, double extra) {
        // Round-trip through the wire encoding so federates see exactly what a socket would carry.
        Envelope wire = canonical_decode(canonical_encode(e));
        peer.up_clock = std::max(peer.up_clock, now + extra + jitter(options.max_latency));
        pending.push({peer.up_clock, order++, true, conn, std::move(wire)});
    };

    ConnId next_conn = 1;
    for (const auto& [id, logic] : logics) {
        const ConnId conn = next_conn++;
        Peer& p = peers[conn];
        p.id = id;
        p.logic = logic;
        const auto* desc = config.find_federate(id);
        send_up(p, conn, make_hello(id, desc ? desc->token : std::string()), 0.0);
    }

    auto dispatch = [&](std::vector<Outgoing> out) {
        for (auto& o : out) {
            auto it = peers.find(o.conn);
            if (it == peers.end()) continue;
            Peer& p = it->second;
            p.down_clock = std::max(p.down_clock, now + jitter(options.max_latency));
            pending.push({p.down_clock, order++, false, o.conn, canonical_decode(canonical_encode(o.envelope)),
                          o.close});
        }
    };

    while (!pending.empty()) {
        Message m = pending.top();
        pending.pop();
        now = m.time;
        if (m.to_coordinator) {
            dispatch(coord.on_envelope(m.conn, m.envelope));
            continue;
        }
        Peer& p = peers.at(m.conn);
        if (p.finished) continue;
        switch (m.envelope.kind) {
            case Kind::Welcome:
                p.logic->on_welcome(m.envelope.payload);
                break;
            case Kind::Deliver:
                p.deliveries.push_back(std::move(m.envelope));
                break;
            case Kind::Tick: {
                const Tick tick = m.envelope.tick;
                auto pubs = p.logic->on_tick(tick, p.deliveries);
                p.deliveries.clear();
                const double think = jitter(options.max_response_delay);
                for (auto& pub : pubs) {
                    send_up(p, m.conn, make_pub(p.id, tick, std::move(pub.topic), p.seq.next(pub.seq),
                                                std::move(pub.payload)),
                            think);
                }
                send_up(p, m.conn, make_tick_done(p.id, tick), think);
                break;
            }
            case Kind::Error:
                if (is_fatal_error(m.envelope)) p.finished = true;
                else p.logic->on_error(m.envelope);
                break;
            default:
                break;
        }
        if (m.close) p.finished = true;
    }
    return {coord.state(), coord.abort_info()};
}

}  // namespace blueice
