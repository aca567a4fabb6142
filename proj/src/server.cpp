#include "blueice/server.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace blueice {
namespace {

using Clock = std::chrono::steady_clock;

struct Event {
    enum class Type { Envelope, FrameError, Disconnected } type;
    ConnId conn = 0;
    Envelope envelope;
    std::string code;
    std::string detail;
};

class EventQueue {
public:
    void push(Event e) {
        {
            std::lock_guard lock(mutex_);
            events_.push_back(std::move(e));
        }
        cv_.notify_one();
    }

    std::optional<Event> pop_for(std::chrono::milliseconds timeout) {
        std::unique_lock lock(mutex_);
        if (!cv_.wait_for(lock, timeout, [this] { return !events_.empty(); })) return std::nullopt;
        Event e = std::move(events_.front());
        events_.pop_front();
        return e;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Event> events_;
};

struct Connection {
    Socket socket;
    std::thread reader;
};

void read_loop(ConnId id, Socket& socket, std::size_t max_bytes, EventQueue& queue) {
    LineReader reader(socket, max_bytes);
    try {
        while (true) {
            Envelope e = frame_read(reader);
            queue.push({Event::Type::Envelope, id, std::move(e), {}, {}});
        }
    } catch (const FrameError& e) {
        queue.push({Event::Type::FrameError, id, {}, e.code(), e.what()});
    } catch (const std::exception& e) {
        queue.push({Event::Type::Disconnected, id, {}, {}, e.what()});
    }
}

}  // namespace

ServeResult serve(const FederationConfig& config, Recorder* recorder, Listener& listener, const ServeOptions& options) {
    Coordinator coord(config, recorder);
    if (options.trace) coord.set_trace(options.trace);
    EventQueue queue;
    std::map<ConnId, std::unique_ptr<Connection>> conns;
    ConnId next_id = 1;

    Tick watched_tick = 0;
    bool watched_open = false;
    auto barrier_since = Clock::now();
    auto run_start = Clock::now();
    bool started = false;

    auto deliver = [&](std::vector<Outgoing> out) {
        if (options.pace) {
            for (const auto& o : out) {
                if (o.envelope.kind != Kind::Tick) continue;
                if (!started) {
                    started = true;
                    run_start = Clock::now();
                }
                const auto offset = std::chrono::duration<double, std::milli>(
                    static_cast<double>(o.envelope.tick) * config.tick_size_ms);
                std::this_thread::sleep_until(run_start + std::chrono::duration_cast<Clock::duration>(offset));
                break;
            }
        }
        for (auto& o : out) {
            auto it = conns.find(o.conn);
            if (it == conns.end()) continue;
            try {
                frame_write(it->second->socket, o.envelope);
            } catch (const ConnectionError&) {
                // The reader thread reports the disconnect.
            }
            if (o.close) it->second->socket.shutdown();
        }
    };

    while (!coord.done()) {
        for (Socket s = listener.accept(0); s.valid(); s = listener.accept(0)) {
            const ConnId id = next_id++;
            auto conn = std::make_unique<Connection>();
            conn->socket = std::move(s);
            conn->reader = std::thread(read_loop, id, std::ref(conn->socket), config.max_record_bytes, std::ref(queue));
            conns.emplace(id, std::move(conn));
        }

        if (auto ev = queue.pop_for(std::chrono::milliseconds(coord.state() == RunState::Waiting ? 5 : 20))) {
            switch (ev->type) {
                case Event::Type::Envelope: deliver(coord.on_envelope(ev->conn, ev->envelope)); break;
                case Event::Type::FrameError: deliver(coord.on_frame_error(ev->conn, ev->code, ev->detail)); break;
                case Event::Type::Disconnected: deliver(coord.on_disconnect(ev->conn)); break;
            }
        }

        const auto& b = coord.barrier();
        if (b.open() != watched_open || b.tick() != watched_tick) {
            watched_open = b.open();
            watched_tick = b.tick();
            barrier_since = Clock::now();
        }
        if (options.health_check && !coord.done()) {
            if (auto failure = options.health_check())
                deliver(coord.on_external_failure("FEDERATE_EXIT", failure->second, {failure->first}));
        }
        const double waited = std::chrono::duration<double>(Clock::now() - barrier_since).count();
        deliver(coord.on_watchdog(waited));
    }

    for (auto& [id, conn] : conns) conn->socket.shutdown();
    for (auto& [id, conn] : conns) {
        if (conn->reader.joinable()) conn->reader.join();
    }

    ServeResult result;
    result.abort = coord.abort_info();
    result.status = coord.state() == RunState::Finished ? ExitStatus::Success : coord.abort_info().status;
    result.ticks_completed = coord.state() == RunState::Finished ? config.max_ticks : coord.barrier().tick();
    return result;
}

}  // namespace blueice
