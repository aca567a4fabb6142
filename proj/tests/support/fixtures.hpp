#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "blueice/config.hpp"
#include "blueice/coordinator.hpp"
#include "blueice/federate.hpp"
#include "blueice/prng.hpp"
#include "blueice/recorder.hpp"
#include "blueice/server.hpp"

namespace blueice::testing {

/// Publishes `topics` every tick with payload {"n": tick, "from": id}.
class Chatter : public FederateLogic {
public:
    Chatter(std::string id, std::vector<std::string> topics) : id_(std::move(id)), topics_(std::move(topics)) {}

    std::vector<Publication> on_tick(Tick tick, const std::vector<Envelope>& deliveries) override {
        for (const auto& d : deliveries) received.emplace_back(tick, d);
        std::vector<Publication> out;
        for (const auto& t : topics_) out.push_back({t, Value{{"n", tick}, {"from", id_}}, std::nullopt});
        return out;
    }
    void on_error(const Envelope& e) override { errors.push_back(e); }

    std::vector<std::pair<Tick, Envelope>> received;
    std::vector<Envelope> errors;

private:
    std::string id_;
    std::vector<std::string> topics_;
};

/// Calls a function every tick.
class Scripted : public FederateLogic {
public:
    using Fn = std::function<std::vector<Publication>(Tick, const std::vector<Envelope>&)>;
    explicit Scripted(Fn fn) : fn_(std::move(fn)) {}
    std::vector<Publication> on_tick(Tick t, const std::vector<Envelope>& d) override { return fn_(t, d); }
    void on_error(const Envelope& e) override { errors.push_back(e); }
    std::vector<Envelope> errors;

private:
    Fn fn_;
};

/// Wraps a logic and sleeps a pseudo-random 0-400 us before each tick's reply.
class Sluggish : public FederateLogic {
public:
    Sluggish(FederateLogic& inner, std::uint64_t seed) : inner_(inner), rng_{seed} {}
    void on_welcome(const Value& w) override { inner_.on_welcome(w); }
    std::vector<Publication> on_tick(Tick t, const std::vector<Envelope>& d) override;
    void on_error(const Envelope& e) override { inner_.on_error(e); }

private:
    FederateLogic& inner_;
    PrngState rng_;
};

/// Minimal config document: federates with tokens "<id>-token", one policy per topic.
struct TopicSpec {
    std::string name;
    std::vector<std::string> publishers;
    std::vector<std::string> subscribers;
};

Value config_doc(const std::vector<std::string>& federates, const std::vector<TopicSpec>& topics,
                 Tick max_ticks = 20, std::uint64_t seed = 1);

/// Every DELIVER names an allowed publisher and subscriber of its topic and is
/// never self-addressed; every PUB comes from an allowed publisher. Returns the
/// violations found.
std::vector<std::string> audit_log(const RunLog& log, const FederationConfig& config);

/// Trace-hook observer that checks the conservative-barrier invariants as the
/// coordinator processes envelopes: TICK(n+1) goes out only after every
/// participant's TICK_DONE(n) was processed, each federate sees consecutive
/// ticks, and every DELIVER precedes the TICK it is due at.
class BarrierAudit {
public:
    explicit BarrierAudit(std::size_t participants) : participants_(participants) {}
    void observe(bool inbound, const Envelope& e);
    Coordinator::TraceHook hook() {
        return [this](bool inbound, ConnId, const Envelope& e) { observe(inbound, e); };
    }
    const std::vector<std::string>& violations() const { return violations_; }
    std::size_t ticks_checked() const { return ticks_checked_; }

private:
    std::size_t participants_;
    std::map<Tick, std::set<std::string>> done_;
    std::map<std::string, Tick> next_tick_;
    std::vector<std::string> violations_;
    std::size_t ticks_checked_ = 0;
};

struct TcpRun {
    ServeResult result;
    RunLog log;
    std::map<std::string, std::string> client_errors;  // federate -> error code or message
};

/// Hosts `config` on a loopback port and runs each logic as a socket client in
/// its own thread. `tokens` overrides the configured token per federate.
TcpRun run_tcp(const FederationConfig& config, const std::map<std::string, FederateLogic*>& logics,
               const ServeOptions& options = {}, const std::map<std::string, std::string>& tokens = {});

std::string cli_path();
std::string configs_dir();
std::string temp_path(const std::string& name);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
/// Runs a shell command, returns its exit status.
int run_command(const std::string& command);

}  // namespace blueice::testing
