#include "fixtures.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "blueice/canonical.hpp"
#include "blueice/client.hpp"
#include "blueice/error.hpp"
#include "blueice/wire.hpp"

namespace blueice::testing {

std::vector<Publication> Sluggish::on_tick(Tick t, const std::vector<Envelope>& d) {
    std::this_thread::sleep_for(std::chrono::microseconds(prng_next(rng_) % 400));
    return inner_.on_tick(t, d);
}

Value config_doc(const std::vector<std::string>& federates, const std::vector<TopicSpec>& topics, Tick max_ticks,
                 std::uint64_t seed) {
    Value doc{{"tick_size_ms", 10}, {"max_ticks", max_ticks}, {"global_seed", seed}, {"tick_timeout_s", 30}};
    Value feds = Value::array();
    for (const auto& id : federates) {
        Value pubs = Value::array();
        Value subs = Value::array();
        for (const auto& t : topics) {
            for (const auto& p : t.publishers)
                if (p == id) pubs.push_back(t.name);
            for (const auto& s : t.subscribers)
                if (s == id) subs.push_back(t.name);
        }
        feds.push_back({{"id", id}, {"token", id + "-token"}, {"publishes", pubs}, {"subscribes", subs}});
    }
    doc["federates"] = feds;
    Value ts = Value::array();
    for (const auto& t : topics)
        ts.push_back({{"name", t.name}, {"allowed_publishers", t.publishers}, {"allowed_subscribers", t.subscribers}});
    doc["topics"] = ts;
    return doc;
}

std::vector<std::string> audit_log(const RunLog& log, const FederationConfig& config) {
    std::vector<std::string> bad;
    std::size_t line = 1;
    for (const auto& e : log.envelopes()) {
        ++line;
        if (e.kind != Kind::Pub && e.kind != Kind::Deliver) continue;
        auto pol = config.policies.find(e.topic);
        if (pol == config.policies.end()) {
            bad.push_back("line " + std::to_string(line) + ": unknown topic " + e.topic);
            continue;
        }
        if (!pol->second.allowed_publishers.contains(e.federate))
            bad.push_back("line " + std::to_string(line) + ": unauthorized publisher " + e.federate);
        if (e.kind == Kind::Deliver) {
            if (!pol->second.allowed_subscribers.contains(e.dest))
                bad.push_back("line " + std::to_string(line) + ": unauthorized destination " + e.dest);
            if (e.dest == e.federate) bad.push_back("line " + std::to_string(line) + ": self delivery");
        }
    }
    return bad;
}

void BarrierAudit::observe(bool inbound, const Envelope& e) {
    auto fail = [&](const std::string& what) {
        if (violations_.size() < 20) violations_.push_back(what);
    };
    if (inbound) {
        if (e.kind == Kind::TickDone) done_[e.tick].insert(e.federate);
        return;
    }
    if (e.kind == Kind::Tick) {
        ++ticks_checked_;
        if (e.tick > 0 && done_[e.tick - 1].size() != participants_)
            fail("TICK(" + std::to_string(e.tick) + ") to " + e.federate + " before barrier " +
                 std::to_string(e.tick - 1) + " completed");
        auto& expected = next_tick_[e.federate];
        if (e.tick != expected)
            fail(e.federate + " got TICK(" + std::to_string(e.tick) + "), expected " + std::to_string(expected));
        expected = e.tick + 1;
    } else if (e.kind == Kind::Deliver) {
        const Tick sent = next_tick_[e.dest];
        if (e.tick < sent)
            fail("DELIVER due " + std::to_string(e.tick) + " to " + e.dest + " after its TICK");
        if (e.tick > sent) fail("DELIVER due " + std::to_string(e.tick) + " to " + e.dest + " sent early");
    }
}

TcpRun run_tcp(const FederationConfig& config, const std::map<std::string, FederateLogic*>& logics,
               const ServeOptions& options, const std::map<std::string, std::string>& tokens) {
    Listener listener(parse_address("127.0.0.1:0"));
    Recorder recorder({config_hash(config.document), config.tick_size_ms, config.global_seed});
    TcpRun run;
    std::mutex mu;
    std::vector<std::thread> clients;
    for (const auto& [id, logic] : logics) {
        ClientOptions co;
        co.address = {"127.0.0.1", listener.port()};
        co.id = id;
        auto tok = tokens.find(id);
        co.token = tok != tokens.end() ? tok->second : config.find_federate(id)->token;
        clients.emplace_back([&run, &mu, co, logic = logic] {
            try {
                run_federate(co, *logic);
            } catch (const ProtocolError& e) {
                std::lock_guard lock(mu);
                run.client_errors[co.id] = e.code();
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                run.client_errors[co.id] = e.what();
            }
        });
    }
    run.result = serve(config, &recorder, listener, options);
    for (auto& t : clients) t.join();
    run.log = recorder.log();
    return run;
}

std::string cli_path() { return BLUEICE_CLI; }
std::string configs_dir() { return BLUEICE_CONFIG_DIR; }

std::string temp_path(const std::string& name) {
    static const std::string dir = [] {
        auto base = std::filesystem::temp_directory_path() / ("blueice-test-" + std::to_string(::getpid()));
        std::filesystem::create_directories(base);
        return base.string();
    }();
    return dir + "/" + name;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

int run_command(const std::string& command) {
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

}  // namespace blueice::testing
