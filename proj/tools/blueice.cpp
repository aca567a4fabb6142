// blueice: operator CLI for the co-simulation bus.
//
// Exit statuses: 0 success, 1 usage, 2 config, 3 protocol abort, 4 watchdog,
// 5 I/O, 6 replay/compare divergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "blueice/canonical.hpp"
#include "blueice/client.hpp"
#include "blueice/config.hpp"
#include "blueice/error.hpp"
#include "blueice/federates.hpp"
#include "blueice/launcher.hpp"
#include "blueice/metrics.hpp"
#include "blueice/recorder.hpp"

namespace {

using namespace blueice;

constexpr int kDivergence = 6;

int code(ExitStatus s) { return static_cast<int>(s); }

std::set<std::string> split_topics(const std::string& csv) {
    std::set<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(item);
    }
    return out;
}

std::string config_dir_of(const std::string& path) {
    auto parent = std::filesystem::path(path).parent_path();
    return parent.empty() ? "." : parent.string();
}

void print_diff(const LogDiff& d) {
    if (d.equal) {
        std::cout << "logs equal\n";
        return;
    }
    std::cout << "logs differ\n";
    std::cout << "  a line " << d.line_a << ": " << (d.line_a ? d.text_a : "<end of log>") << "\n";
    std::cout << "  b line " << d.line_b << ": " << (d.line_b ? d.text_b : "<end of log>") << "\n";
}

int report_outcome(const RunOutcome& out) {
    if (out.status == ExitStatus::Success) {
        std::cerr << "run complete: " << out.log.body.size() << " log records\n";
    } else {
        std::cerr << "run aborted (" << out.abort.code << "): " << out.abort.reason << "\n";
        if (!out.abort.federates.empty()) {
            std::cerr << "  federates:";
            for (const auto& f : out.abort.federates) std::cerr << " " << f;
            std::cerr << "\n";
        }
    }
    return code(out.status);
}

struct RunArgs {
    std::string config;
    std::string record;
    long long max_ticks = -1;
    long long seed = -1;
    bool pace = false;
    bool external_only = false;
    std::string listen;
};

Value adjusted_document(const RunArgs& a) {
    Value doc = load_document(a.config);
    if (a.max_ticks >= 0 && doc.is_object()) doc["max_ticks"] = static_cast<std::uint64_t>(a.max_ticks);
    if (a.seed >= 0 && doc.is_object()) doc["global_seed"] = static_cast<std::uint64_t>(a.seed);
    return doc;
}

RunOptions run_options(const RunArgs& a) {
    RunOptions opts;
    if (!a.record.empty()) opts.record_path = a.record;
    opts.pace = a.pace;
    opts.external_only = a.external_only;
    if (!a.listen.empty()) opts.listen_address = a.listen;
    opts.config_dir = config_dir_of(a.config);
    return opts;
}

struct FederateArgs {
    std::string connect = kDefaultListenAddress;
    std::string id;
    std::string token;
    std::string scenario;
    std::string scenario_json;
    long long crash_at_tick = -1;
    std::string log;
    std::string topics;
    std::string source;
    bool no_hash_check = false;
};

/// Exits the process abruptly at a given tick; simulates a crashed simulator.
class CrashAt : public FederateLogic {
public:
    CrashAt(FederateLogic& inner, Tick tick) : inner_(inner), tick_(tick) {}
    void on_welcome(const Value& w) override { inner_.on_welcome(w); }
    std::vector<Publication> on_tick(Tick t, const std::vector<Envelope>& d) override {
        if (t == tick_) std::_Exit(9);
        return inner_.on_tick(t, d);
    }
    void on_error(const Envelope& e) override { inner_.on_error(e); }

private:
    FederateLogic& inner_;
    Tick tick_;
};

int drive(const FederateArgs& a, FederateLogic& logic) {
    ClientOptions opts{parse_address(a.connect), a.id, a.token};
    std::optional<CrashAt> crash;
    FederateLogic* l = &logic;
    if (a.crash_at_tick >= 0) {
        crash.emplace(logic, static_cast<Tick>(a.crash_at_tick));
        l = &*crash;
    }
    const Tick ticks = run_federate(opts, *l);
    std::cerr << a.id << ": completed " << ticks << " ticks\n";
    return 0;
}

Value scenario_of(const FederateArgs& a) {
    if (!a.scenario_json.empty()) return decode_value(a.scenario_json);
    if (!a.scenario.empty()) return load_document(a.scenario);
    return Value::object();
}

template <typename F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error [" << e.code() << "]: " << e.what() << "\n";
        return code(ExitStatus::ProtocolAbort);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return code(ExitStatus::Config);
    } catch (const DecodeError& e) {
        std::cerr << "decode error: " << e.what() << "\n";
        return code(ExitStatus::Config);
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return code(ExitStatus::Io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return code(ExitStatus::Io);
    }
}

void add_run_flags(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("config", a.config, "Federation config file")->required();
    cmd->add_option("--record", a.record, "Write the canonical run log here (plus <path>.timing)");
    cmd->add_option("--max-ticks", a.max_ticks, "Override max_ticks");
    cmd->add_option("--seed", a.seed, "Override global_seed");
    cmd->add_flag("--pace", a.pace, "Pace ticks to wall-clock time");
    cmd->add_flag("--external-only", a.external_only, "Spawn no federates; wait for remote ones");
    cmd->add_option("--listen", a.listen, "Listen address host:port (default from config or BLUEICE_LISTEN)");
}

void add_federate_flags(CLI::App* cmd, FederateArgs& a) {
    cmd->add_option("--connect", a.connect, "Coordinator address host:port");
    cmd->add_option("--id", a.id, "Federate id")->required();
    cmd->add_option("--token", a.token, "Authorization token")->required();
    cmd->add_option("--crash-at-tick", a.crash_at_tick, "Exit abruptly on receiving this tick (fault injection)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blueice: federated co-simulation bus"};
    app.require_subcommand(1);

    // validate
    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a federation config");
    validate->add_option("config", validate_path, "Federation config file")->required();

    // run
    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a federation");
    add_run_flags(run, run_args);

    // replay
    RunArgs replay_args;
    std::string replay_log, replay_topics, replay_as;
    bool replay_check = false;
    auto* replay = app.add_subcommand("replay", "Run a federation with one federate replaced by a log replay");
    add_run_flags(replay, replay_args);
    replay->add_option("--log", replay_log, "Recorded run log")->required();
    replay->add_option("--topics", replay_topics, "Comma-separated topics to replay")->required();
    replay->add_option("--as", replay_as, "Federate to replace (default: the publisher of those topics)");
    replay->add_flag("--check", replay_check, "Compare the new log with the recorded one on the replayed topics");

    // diff
    std::string diff_a, diff_b, diff_topics;
    auto* diff = app.add_subcommand("diff", "Compare two canonical run logs");
    diff->add_option("a", diff_a)->required();
    diff->add_option("b", diff_b)->required();
    diff->add_option("--topics", diff_topics, "Restrict to PUB/DELIVER records on these topics");

    // stats
    std::string samples_path, cdf_csv_path, stats_log, delta_topic = "map_delta", ack_topic = "map_ack";
    std::vector<std::string> rmse_paths;
    bool map_latency = false;
    std::string trajectory_topic;
    auto* stats = app.add_subcommand("stats", "Latency, RMSE and map-update statistics");
    stats->add_option("--samples", samples_path, "Latency samples file, one ms value per line");
    stats->add_option("--cdf-csv", cdf_csv_path, "Also write the ECDF points as CSV");
    stats->add_option("--rmse", rmse_paths, "Two trajectory CSVs (tick,x,y)")->expected(2);
    stats->add_option("--log", stats_log, "Run log to analyse");
    stats->add_flag("--map-latency", map_latency, "Map-update latency from --log");
    stats->add_option("--delta-topic", delta_topic, "Map delta topic");
    stats->add_option("--ack-topic", ack_topic, "Map acknowledgement topic");
    stats->add_option("--trajectories", trajectory_topic, "Dump per-vehicle trajectories from --log on this topic");

    // demo federates
    FederateArgs vehicle_args, traffic_args, infra_args, replayer_args;
    auto* vehicle = app.add_subcommand("vehicle", "Kinematic ego-vehicle federate");
    auto* traffic = app.add_subcommand("traffic", "Car-following background traffic federate");
    auto* infra = app.add_subcommand("infra", "Signal and map-authority federate");
    for (auto [cmd, a] : {std::pair{vehicle, &vehicle_args}, std::pair{traffic, &traffic_args},
                          std::pair{infra, &infra_args}}) {
        add_federate_flags(cmd, *a);
        cmd->add_option("--scenario", a->scenario, "Scenario file");
        cmd->add_option("--scenario-json", a->scenario_json, "Inline scenario document");
    }
    auto* replayer = app.add_subcommand("replayer", "Federate that republishes recorded PUBs");
    add_federate_flags(replayer, replayer_args);
    replayer->add_option("--log", replayer_args.log, "Recorded run log")->required();
    replayer->add_option("--topics", replayer_args.topics, "Comma-separated topics to replay");
    replayer->add_option("--source", replayer_args.source, "Replay PUBs originally sent by this federate (default: own id)");
    replayer->add_flag("--no-hash-check", replayer_args.no_hash_check, "Skip the config_hash check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : code(ExitStatus::Usage);
    }

    if (*validate) {
        return guarded([&] {
            const auto diags = validate_config(load_document(validate_path));
            if (diags.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            for (const auto& d : diags) std::cout << to_string(d) << "\n";
            return code(ExitStatus::Config);
        });
    }

    if (*run) {
        return guarded([&] {
            const FederationConfig cfg = parse_config(adjusted_document(run_args));
            return report_outcome(run_federation(cfg, run_options(run_args)));
        });
    }

    if (*replay) {
        return guarded([&] {
            Value doc = adjusted_document(replay_args);
            const RunLog source = read_run_log(replay_log);
            const auto topics = split_topics(replay_topics);
            std::string target = replay_as;
            if (target.empty()) {
                std::set<std::string> publishers;
                for (const auto& [tick, pubs] : replay_load(source, topics).pubs)
                    for (const auto& e : pubs) publishers.insert(e.federate);
                if (publishers.size() != 1)
                    throw ConfigError("cannot infer which federate to replace; pass --as");
                target = *publishers.begin();
            }
            bool found = false;
            for (auto& f : doc["federates"]) {
                if (f.value("id", "") != target) continue;
                found = true;
                const auto abs_log = std::filesystem::absolute(replay_log).string();
                f["launch"] = Value{{"command", "replayer"}, {"args", {"--log", abs_log, "--topics", replay_topics}}};
            }
            if (!found) throw ConfigError("no federate '" + target + "' in config");
            const FederationConfig cfg = parse_config(doc);
            const RunOutcome out = run_federation(cfg, run_options(replay_args));
            const int rc = report_outcome(out);
            if (rc != 0 || !replay_check) return rc;
            const LogDiff d = logs_equal(source, out.log, topics);
            print_diff(d);
            return d.equal ? 0 : kDivergence;
        });
    }

    if (*diff) {
        return guarded([&] {
            std::optional<std::set<std::string>> topics;
            if (!diff_topics.empty()) topics = split_topics(diff_topics);
            const LogDiff d = logs_equal(read_run_log(diff_a), read_run_log(diff_b), topics);
            print_diff(d);
            return d.equal ? 0 : kDivergence;
        });
    }

    if (*stats) {
        return guarded([&] {
            Value report = Value::object();
            if (!samples_path.empty()) {
                const LatencyReport r = latency_report(load_samples(samples_path));
                report["latency"] = to_value(r);
                if (!cdf_csv_path.empty()) {
                    std::ofstream out(cdf_csv_path);
                    out << cdf_csv(r);
                    if (!out) throw IoError("write failed: " + cdf_csv_path);
                }
            }
            if (!rmse_paths.empty()) {
                report["rmse_m"] = rmse(load_trajectory_csv(rmse_paths[0]), load_trajectory_csv(rmse_paths[1]));
            }
            if (map_latency || !trajectory_topic.empty()) {
                if (stats_log.empty()) throw ConfigError("--map-latency and --trajectories need --log");
                const RunLog log = read_run_log(stats_log);
                if (map_latency) {
                    const MapLatency m = map_update_latency(log, delta_topic, ack_topic);
                    Value lat = Value::object();
                    for (const auto& [id, ms] : m.latencies_ms) lat[id] = ms;
                    report["map_update_latency_ms"] = lat;
                    report["map_update_unmatched"] = m.unmatched;
                }
                if (!trajectory_topic.empty()) {
                    Value trajs = Value::object();
                    for (const auto& [id, t] : trajectories_from_log(log, trajectory_topic)) {
                        Value pts = Value::array();
                        for (const auto& p : t) pts.push_back({p.tick, p.x, p.y});
                        trajs[id] = pts;
                    }
                    report["trajectories"] = trajs;
                }
            }
            if (report.empty()) throw ConfigError("nothing to do: pass --samples, --rmse or --log");
            std::cout << encode_value(report) << "\n";
            return 0;
        });
    }

    for (auto [cmd, a] : {std::pair{vehicle, &vehicle_args}, std::pair{traffic, &traffic_args},
                          std::pair{infra, &infra_args}}) {
        if (*cmd) {
            return guarded([&] {
                auto logic = make_demo_federate(cmd->get_name(), a->id, scenario_of(*a));
                return drive(*a, *logic);
            });
        }
    }

    if (*replayer) {
        return guarded([&] {
            const RunLog log = read_run_log(replayer_args.log);
            ReplaySchedule schedule = replay_load(log, split_topics(replayer_args.topics));
            schedule = schedule.for_source(replayer_args.source.empty() ? replayer_args.id : replayer_args.source);
            ReplayFederate logic(replayer_args.id, std::move(schedule), !replayer_args.no_hash_check);
            return drive(replayer_args, logic);
        });
    }
    return code(ExitStatus::Usage);
}
