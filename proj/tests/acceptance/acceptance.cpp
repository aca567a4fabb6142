// Acceptance checks. One line per criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

#include "blueice/bus.hpp"
#include "blueice/canonical.hpp"
#include "blueice/config.hpp"
#include "blueice/federates.hpp"
#include "blueice/local.hpp"
#include "blueice/metrics.hpp"
#include "blueice/netmodel.hpp"
#include "blueice/recorder.hpp"
#include "fixtures.hpp"
#include "serial_oracle.hpp"

using namespace blueice;
using namespace blueice::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

// Every log produced below, for the access-control audit.
std::vector<std::pair<RunLog, FederationConfig>> audited;

void criterion(int n, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.1fs", secs);
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << n << " " << name << ": " << o.detail << " (" << timing << ")"
              << std::endl;
}

std::string demo_path() { return configs_dir() + "/demo.json"; }

FederationConfig demo_config(std::optional<Tick> ticks = std::nullopt) {
    auto doc = load_document(demo_path());
    if (ticks) doc["max_ticks"] = *ticks;
    return parse_config(doc);
}

std::string cli(const std::string& args) { return cli_path() + " " + args + " >/dev/null 2>&1"; }

std::map<std::string, std::unique_ptr<FederateLogic>> demo_logics(const FederationConfig& cfg) {
    std::map<std::string, std::unique_ptr<FederateLogic>> out;
    for (const auto& f : cfg.federates) out[f.id] = make_demo_federate(f.launch["command"], f.id, f.launch["scenario"]);
    return out;
}

std::map<std::string, FederateLogic*> raw(const std::map<std::string, std::unique_ptr<FederateLogic>>& m) {
    std::map<std::string, FederateLogic*> out;
    for (const auto& [k, v] : m) out[k] = v.get();
    return out;
}

// --- 1 ----------------------------------------------------------------------

Outcome barrier_safety() {
    const std::vector<std::string> ids{"a", "b", "c", "d"};
    const auto cfg = parse_config(config_doc(ids, {{"t", ids, ids}}, 500));
    std::size_t ticks = 0;
    for (std::uint64_t trial = 1; trial <= 100; ++trial) {
        std::vector<std::unique_ptr<Chatter>> feds;
        std::map<std::string, FederateLogic*> logics;
        for (const auto& id : ids) {
            feds.push_back(std::make_unique<Chatter>(id, std::vector<std::string>{"t"}));
            logics[id] = feds.back().get();
        }
        BarrierAudit audit(ids.size());
        LocalOptions opts;
        opts.jitter_seed = trial;
        Recorder rec({config_hash(cfg.document), cfg.tick_size_ms, cfg.global_seed});
        const auto r = run_local(cfg, logics, &rec, opts, audit.hook());
        if (r.state != RunState::Finished) return {false, "trial " + std::to_string(trial) + " did not finish"};
        if (!audit.violations().empty())
            return {false, "trial " + std::to_string(trial) + ": " + audit.violations().front()};
        if (audit.ticks_checked() != 2000) return {false, "trial " + std::to_string(trial) + " missing TICKs"};
        ticks += audit.ticks_checked();
        if (trial == 1) audited.emplace_back(rec.log(), cfg);
    }

    // The same invariant over real sockets with randomized response delays.
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
        std::vector<std::unique_ptr<Chatter>> inner;
        std::vector<std::unique_ptr<Sluggish>> outer;
        std::map<std::string, FederateLogic*> logics;
        for (const auto& id : ids) {
            inner.push_back(std::make_unique<Chatter>(id, std::vector<std::string>{"t"}));
            outer.push_back(std::make_unique<Sluggish>(*inner.back(), trial * 31 + id[0]));
            logics[id] = outer.back().get();
        }
        BarrierAudit audit(ids.size());
        ServeOptions opts;
        opts.trace = audit.hook();
        const auto r = run_tcp(cfg, logics, opts);
        if (r.result.status != ExitStatus::Success) return {false, "tcp trial failed: " + r.result.abort.reason};
        if (!audit.violations().empty()) return {false, "tcp: " + audit.violations().front()};
        ticks += audit.ticks_checked();
    }
    return {true, "100 jittered in-process trials + 3 socket trials, 4 federates x 500 ticks, " +
                      std::to_string(ticks) + " TICKs checked, no early TICK"};
}

// --- 2 ----------------------------------------------------------------------

Outcome determinism() {
    const auto a = temp_path("det_a.log"), b = temp_path("det_b.log"), c = temp_path("det_c.log");
    double worst = 0;
    for (const auto& [path, extra] : {std::pair{a, std::string()}, std::pair{b, std::string()},
                                      std::pair{c, std::string(" --seed 1")}}) {
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = run_command(cli("run " + demo_path() + " --record " + path + extra));
        worst = std::max(worst, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        if (rc != 0) return {false, "run exited " + std::to_string(rc)};
    }
    const auto la = read_file(a), lb = read_file(b), lc = read_file(c);
    audited.emplace_back(parse_run_log(la), demo_config());
    std::ostringstream d;
    d << "two 1000-tick runs " << (la == lb ? "byte-identical" : "DIFFER") << " (" << la.size() << " bytes), seed change "
      << (la != lc ? "differs" : "IDENTICAL") << ", slowest run " << std::round(worst * 10) / 10 << "s";
    return {la == lb && la != lc && worst < 60.0, d.str()};
}

// --- 3, 4 -------------------------------------------------------------------

FederationConfig delay_config(double slow_ms, Tick ticks) {
    auto doc = config_doc({"dst", "src"}, {{"d11", {"src"}, {"dst"}}, {"d0", {"src"}, {"dst"}}, {"slow", {"src"}, {"dst"}}},
                          ticks, 3);
    doc["delay_models"] = {{"c11", {{"kind", "CONSTANT"}, {"constant_ms", 11}}},
                           {"c0", {{"kind", "CONSTANT"}, {"constant_ms", 0}}},
                           {"slow", {{"kind", "CONSTANT"}, {"constant_ms", slow_ms}}}};
    doc["links"] = Value::array({{{"topic", "d11"}, {"model", "c11"}},
                                 {{"topic", "d0"}, {"model", "c0"}},
                                 {{"topic", "slow"}, {"model", "slow"}}});
    return parse_config(doc);
}

RunLog run_delay_federation(const FederationConfig& cfg) {
    Chatter src("src", {"d11", "d0", "slow"}), dst("dst", {});
    Recorder rec({config_hash(cfg.document), cfg.tick_size_ms, cfg.global_seed});
    const auto r = run_local(cfg, {{"src", &src}, {"dst", &dst}}, &rec, {std::uint64_t{5}});
    if (r.state != RunState::Finished) throw std::runtime_error("run did not finish: " + r.abort.reason);
    audited.emplace_back(rec.log(), cfg);
    return rec.log();
}

Outcome delay_quantization() {
    const auto cfg = delay_config(0, 200);
    const auto log = run_delay_federation(cfg);
    std::map<std::pair<std::string, std::uint64_t>, Tick> sent;
    std::map<std::string, std::set<Tick>> offsets;
    std::map<std::string, int> counts;
    for (const auto& e : log.envelopes()) {
        if (e.kind == Kind::Pub) sent[{e.topic, e.seq}] = e.tick;
        if (e.kind == Kind::Deliver) {
            offsets[e.topic].insert(e.tick - sent.at({e.topic, e.seq}));
            ++counts[e.topic];
        }
    }
    const bool ok = offsets["d11"] == std::set<Tick>{2} && offsets["d0"] == std::set<Tick>{1} && counts["d11"] > 100 &&
                    counts["d0"] > 100;
    return {ok, "CONSTANT 11 ms -> +" + std::to_string(*offsets["d11"].begin()) + " ticks over " +
                    std::to_string(counts["d11"]) + " messages; CONSTANT 0 ms -> +" +
                    std::to_string(*offsets["d0"].begin()) + " over " + std::to_string(counts["d0"])};
}

Outcome non_blocking() {
    const auto slow = run_delay_federation(delay_config(5000, 1000));
    const auto fast = run_delay_federation(delay_config(0, 1000));
    auto strip = [](const RunLog& log) {
        std::vector<std::string> out;
        for (const auto& line : log.body)
            if (line.find(R"("kind":"DELIVER")") == std::string::npos) out.push_back(line);
        return out;
    };
    auto ticks = [](const RunLog& log) {
        std::vector<std::size_t> idx;
        std::size_t i = 0;
        for (const auto& e : log.envelopes()) {
            if (e.kind == Kind::Tick) idx.push_back(e.tick);
            if (e.kind != Kind::Deliver) ++i;
        }
        return idx;
    };
    std::size_t slow_deliveries = 0;
    Tick first_slow = 0;
    for (const auto& e : slow.envelopes()) {
        if (e.kind == Kind::Deliver && e.topic == "slow" && slow_deliveries++ == 0) first_slow = e.tick;
    }
    const bool same = strip(slow) == strip(fast) && ticks(slow) == ticks(fast) && ticks(slow).size() == 2000;
    return {same && first_slow == 500,
            std::string("5000 ms link: all 1000 ticks issued, non-DELIVER records ") + (same ? "identical" : "DIFFER") +
                " to the 0 ms run; first slow delivery at tick " + std::to_string(first_slow)};
}

// --- 5, 6, 7 ----------------------------------------------------------------

Outcome ecdf() {
    const LatencySampleSet s({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    const double e = ecdf_eval(s, 11);
    const double q = ecdf_quantile(s, 0.91666);
    std::ostringstream d;
    d.precision(12);
    d << "ECDF(11)=" << e << ", quantile(0.91666)=" << q;
    return {std::abs(e - 11.0 / 12.0) <= 1e-9 && q == 11.0, d.str()};
}

Outcome loss() {
    auto fraction = [](double p) {
        auto doc = config_doc({"a", "b"}, {{"t", {"a"}, {"b"}}}, 10, 99);
        doc["links"] = Value::array({{{"topic", "t"}, {"model", "z"}, {"loss_probability", p}}});
        doc["delay_models"] = {{"z", {{"kind", "CONSTANT"}, {"constant_ms", 0}}}};
        const auto cfg = parse_config(doc);
        Bus bus(cfg);
        const int n = 100000;
        int lost = 0;
        for (int i = 0; i < n; ++i) lost += bus.route(make_pub("a", 0, "t", i, Value::object())).empty();
        return static_cast<double>(lost) / n;
    };
    const double q = fraction(0.25), zero = fraction(0.0), one = fraction(1.0);
    std::ostringstream d;
    d << "p=0.25 -> " << q << " lost over 1e5, p=0 -> " << zero << ", p=1 -> " << one;
    return {q >= 0.24 && q <= 0.26 && zero == 0.0 && one == 1.0, d.str()};
}

Outcome station_tie() {
    const std::vector<LatencyStation> st{{"gamma", {0, 10}, DelayModel::constant(1), 1.0},
                                         {"alpha", {10, 0}, DelayModel::constant(1), 0.0},
                                         {"beta", {-10, 0}, DelayModel::constant(1), 1.0}};
    const auto& direct = nearest_station({0, 0}, st);

    // Through the bus: only alpha's link is lossless, so delivery proves alpha was chosen.
    auto doc = config_doc({"a", "b"}, {{"t", {"a"}, {"b"}}}, 10);
    doc["stations"] = Value::array();
    for (const auto& s : st)
        doc["stations"].push_back({{"id", s.id}, {"position", {s.position.x, s.position.y}},
                                   {"delay", {{"kind", "CONSTANT"}, {"constant_ms", 1}}},
                                   {"loss_probability", s.loss_probability}});
    doc["links"] = Value::array({{{"topic", "t"}, {"model", "STATION_NEAREST"}}});
    const auto cfg = parse_config(doc);
    Bus bus(cfg);
    int delivered = 0;
    for (int i = 0; i < 100; ++i) delivered += bus.route(make_pub("a", 0, "t", i, Value{{"x", 0}, {"y", 0}})).size();
    return {direct.id == "alpha" && delivered == 100,
            "equidistant gamma/alpha/beta -> " + direct.id + "; routed " + std::to_string(delivered) + "/100 via it"};
}

// --- 8 ----------------------------------------------------------------------

Outcome serial_equivalence() {
    // 600 ticks so the signal turns RED (tick 400) and the vehicle's motion depends
    // on when lossy, jittered SPaT messages arrive.
    const Tick n = 600;
    const auto log_path = temp_path("serial_cmp.log");
    const int rc = run_command(cli("run " + demo_path() + " --max-ticks 600 --record " + log_path));
    if (rc != 0) return {false, "distributed run exited " + std::to_string(rc)};
    const auto dist = read_run_log(log_path);
    const auto cfg = demo_config(n);
    audited.emplace_back(dist, cfg);

    auto logics = demo_logics(cfg);
    const auto trace = serial_reference_run(cfg, raw(logics), n);
    const auto& serial = trace.published;

    std::map<std::pair<std::string, Tick>, std::pair<double, double>> ref;
    std::map<std::tuple<std::string, std::string, std::uint64_t>, const Envelope*> by_key;
    for (const auto& e : serial) {
        by_key[{e.federate, e.topic, e.seq}] = &e;
        if (e.topic == "bsm" || e.topic == "traffic_bsm")
            ref[{e.payload["vehicle_id"].get<std::string>(), e.tick}] = {e.payload["x"].get<double>(),
                                                                         e.payload["y"].get<double>()};
    }
    double worst = 0;
    std::size_t compared = 0, pubs = 0, mismatched = 0;
    std::vector<Envelope> delivered;
    for (const auto& e : dist.envelopes()) {
        if (e.kind == Kind::Deliver) delivered.push_back(e);
        if (e.kind != Kind::Pub) continue;
        ++pubs;
        auto same = by_key.find({e.federate, e.topic, e.seq});
        if (same == by_key.end() || same->second->tick != e.tick) ++mismatched;
        if (e.topic != "bsm" && e.topic != "traffic_bsm") continue;
        auto it = ref.find({e.payload["vehicle_id"].get<std::string>(), e.tick});
        if (it == ref.end()) return {false, "no serial sample for a distributed BSM at tick " + std::to_string(e.tick)};
        worst = std::max({worst, std::abs(e.payload["x"].get<double>() - it->second.first),
                          std::abs(e.payload["y"].get<double>() - it->second.second)});
        ++compared;
    }
    std::ostringstream d;
    d << compared << " positions over " << n << " ticks, max |diff| " << worst << " m, PUBs " << pubs << " vs "
      << serial.size() << ", " << mismatched << " without a same-tick serial twin, DELIVERs " << delivered.size()
      << " vs " << trace.delivered.size() << (delivered == trace.delivered ? " identical" : " DIFFER");
    return {compared == ref.size() && pubs == serial.size() && mismatched == 0 && worst <= 1e-12 &&
                delivered == trace.delivered,
            d.str()};
}

// --- 9 ----------------------------------------------------------------------

Outcome map_latency() {
    auto doc = config_doc({"infra", "vehicle"}, {{"spat", {"infra"}, {"vehicle"}},
                                                 {"map_delta", {"infra"}, {"vehicle"}},
                                                 {"map_ack", {"vehicle"}, {"infra"}},
                                                 {"bsm", {"vehicle"}, {"infra"}}},
                          300);
    doc["delay_models"] = {{"ack", {{"kind", "CONSTANT"}, {"constant_ms", 900}}}};
    doc["links"] = Value::array({{{"topic", "map_ack"}, {"model", "ack"}}});
    const auto cfg = parse_config(doc);
    const Value delta{{"tick", 10}, {"feature_id", "stop_1"}, {"kind", "stop_sign"},
                      {"position", {50, -20}}, {"present", false}};
    InfraFederate infra("infra", Value{{"features", Value::array()}, {"deltas", Value::array({delta})}});
    VehicleFederate vehicle("vehicle");
    Recorder rec({config_hash(cfg.document), cfg.tick_size_ms, cfg.global_seed});
    run_local(cfg, {{"infra", &infra}, {"vehicle", &vehicle}}, &rec);
    audited.emplace_back(rec.log(), cfg);
    const auto m = map_update_latency(rec.log());
    if (m.latencies_ms.size() != 1) return {false, "expected one acknowledged delta"};
    const double ms = m.latencies_ms[0].second;
    return {std::abs(ms - 910.0) <= cfg.tick_size_ms && ms < 1000.0,
            "900 ms ack link -> map-update latency " + format_number(ms) + " ms (expected 910 +/- 10)"};
}

// --- 10 ---------------------------------------------------------------------

Outcome access_control() {
    auto doc = config_doc({"ctrl", "plant", "rogue"}, {{"cmd", {"ctrl"}, {"plant"}}}, 50);
    doc["federates"][2]["publishes"].push_back("cmd");  // declared, but not an allowed publisher
    const auto cfg = parse_config(doc);
    Chatter ctrl("ctrl", {"cmd"}), plant("plant", {}), rogue("rogue", {"cmd"});
    const auto r = run_tcp(cfg, {{"ctrl", &ctrl}, {"plant", &plant}, {"rogue", &rogue}});
    if (r.result.status != ExitStatus::Success) return {false, "run aborted: " + r.result.abort.reason};
    audited.emplace_back(r.log, cfg);

    std::size_t forbidden = 0;
    for (const auto& e : rogue.errors) forbidden += e.error_code == "FORBIDDEN";
    std::size_t from_rogue = 0;
    for (const auto& [tick, e] : plant.received) from_rogue += e.federate == "rogue";

    std::size_t violations = 0;
    std::size_t records = 0;
    for (const auto& [log, config] : audited) {
        violations += audit_log(log, config).size();
        records += log.body.size();
    }
    return {forbidden == 50 && from_rogue == 0 && violations == 0,
            std::to_string(forbidden) + "/50 rogue PUBs got FORBIDDEN, " + std::to_string(from_rogue) +
                " reached a subscriber; audit of " + std::to_string(audited.size()) + " logs (" +
                std::to_string(records) + " records) found " + std::to_string(violations) + " violations"};
}

// --- 11 ---------------------------------------------------------------------

Outcome rmse_checks() {
    Trajectory a, b;
    for (Tick t = 0; t < 1000; ++t) {
        a.push_back({t, 0.5 * t, -3.0});
        b.push_back({t, 0.5 * t + 0.03, -3.0});
    }
    const double constant = rmse(a, b);
    const double two = rmse({{0, 0, 0}, {1, 1, 1}}, {{0, 0.03, 0}, {1, 1, 1.04}});
    std::ostringstream d;
    d.precision(15);
    d << "constant 0.03 m offset -> " << constant << "; (0.03, 0.04) pair -> " << two;
    return {std::abs(constant - 0.03) <= 1e-12 && std::abs(two - 0.0353553) <= 1e-6 &&
                std::abs(two - std::sqrt(0.00125)) <= 1e-9,
            d.str()};
}

// --- 12 ---------------------------------------------------------------------

Outcome replay() {
    const auto rec = temp_path("replay_src.log"), rep = temp_path("replay_out.log");
    if (int rc = run_command(cli("run " + demo_path() + " --max-ticks 500 --record " + rec)); rc != 0)
        return {false, "record run exited " + std::to_string(rc)};
    const int rc = run_command(
        cli("replay " + demo_path() + " --max-ticks 500 --log " + rec + " --topics traffic_bsm --check --record " + rep));
    const auto a = read_run_log(rec), b = read_run_log(rep);
    audited.emplace_back(b, demo_config(500));
    const auto d = logs_equal(a, b, std::set<std::string>{"traffic_bsm"});
    std::size_t n = 0;
    for (const auto& e : a.envelopes()) n += e.topic == "traffic_bsm";
    return {rc == 0 && d.equal && n > 0,
            "500 ticks recorded and replayed; " + std::to_string(n) + " traffic_bsm records " +
                (d.equal ? "identical" : "differ at line " + std::to_string(d.line_a)) + ", replay exit " +
                std::to_string(rc)};
}

// --- 13 ---------------------------------------------------------------------

Outcome platoon() {
    auto check = [](const Value& scenario, std::string& detail) {
        TrafficFederate traffic("traffic", scenario);
        traffic.on_welcome(Value{{"tick_size_ms", 10}});
        double min_gap = 1e9;
        for (Tick t = 0; t < 12000; ++t) {
            traffic.on_tick(t, {});
            const auto& ag = traffic.agents();
            for (std::size_t i = 1; i < ag.size(); ++i)
                min_gap = std::min(min_gap, ag[i - 1].position_s - ag[i - 1].length - ag[i].position_s);
        }
        const auto& ag = traffic.agents();
        double spread = 0;
        for (const auto& a : ag) spread = std::max(spread, std::abs(a.speed - ag[0].speed));
        std::ostringstream d;
        d << ag.size() << " agents: max |v - v_lead| " << spread << " m/s at 120 s, min gap " << min_gap << " m";
        detail = d.str();
        return spread <= 0.01 && min_gap > 0;
    };
    std::string d1, d2;
    const bool default_ok = check(Value::object(), d1);
    Value six = Value::array();
    const double speeds[] = {15, 9, 18, 12, 6, 14};
    for (int i = 0; i < 6; ++i) six.push_back({{"id", "v" + std::to_string(i)}, {"position_s", 150.0 - 30.0 * i}, {"speed", speeds[i]}});
    const bool six_ok = check(Value{{"agents", six}}, d2);
    return {default_ok && six_ok, d1 + "; " + d2};
}

}  // namespace

int main() {
    criterion(1, "barrier safety", barrier_safety);
    criterion(2, "bit-exact determinism", determinism);
    criterion(3, "delay quantization", delay_quantization);
    criterion(4, "long delays never block ticks", non_blocking);
    criterion(5, "empirical CDF", ecdf);
    criterion(6, "loss injection", loss);
    criterion(7, "nearest-station tie-break", station_tie);
    criterion(8, "serial-oracle equivalence", serial_equivalence);
    criterion(9, "map-update latency", map_latency);
    criterion(11, "trajectory RMSE", rmse_checks);
    criterion(12, "record and replay", replay);
    criterion(13, "platoon convergence", platoon);
    // Last, so the audit covers every log produced above.
    criterion(10, "access control", access_control);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
