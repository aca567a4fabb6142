#include "blueice/metrics.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "blueice/canonical.hpp"
#include "blueice/error.hpp"

namespace blueice {

double rmse(const Trajectory& a, const Trajectory& b) {
    std::map<Tick, const TrajectoryPoint*> by_tick;
    for (const auto& p : a) by_tick[p.tick] = &p;
    std::set<Tick> seen;
    std::vector<Tick> only_b;
    double sum = 0.0;
    for (const auto& q : b) {
        auto it = by_tick.find(q.tick);
        if (it == by_tick.end()) {
            only_b.push_back(q.tick);
            continue;
        }
        seen.insert(q.tick);
        const double dx = it->second->x - q.x;
        const double dy = it->second->y - q.y;
        sum += dx * dx + dy * dy;
    }
    std::vector<Tick> only_a;
    for (const auto& p : a) {
        if (!seen.contains(p.tick)) only_a.push_back(p.tick);
    }
    if (!only_a.empty() || !only_b.empty()) {
        std::string msg = "trajectories cover different ticks;";
        auto list = [&](const char* label, const std::vector<Tick>& ticks) {
            if (ticks.empty()) return;
            msg += std::string(" ") + label + ":";
            for (std::size_t i = 0; i < ticks.size() && i < 20; ++i) msg += " " + std::to_string(ticks[i]);
            if (ticks.size() > 20) msg += " ...";
        };
        list("missing from second", only_a);
        list("missing from first", only_b);
        throw ConfigError(msg);
    }
    if (a.empty()) throw ConfigError("empty trajectories");
    return std::sqrt(sum / static_cast<double>(a.size()));
}

Trajectory load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory: " + path);
    Trajectory t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line) {
            if (c == ',') c = ' ';
        }
        std::istringstream ss(line);
        TrajectoryPoint p;
        if (!(ss >> p.tick >> p.x >> p.y)) {
            if (lineno == 1) continue;  // header
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected tick,x,y");
        }
        if (!t.empty() && p.tick <= t.back().tick)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": ticks must be strictly increasing");
        t.push_back(p);
    }
    return t;
}

std::map<std::string, Trajectory> trajectories_from_log(const RunLog& log, const std::string& topic) {
    std::map<std::string, Trajectory> out;
    for (const auto& e : log.envelopes()) {
        if (e.kind != Kind::Pub || e.topic != topic) continue;
        const auto id = e.payload.at("vehicle_id").get<std::string>();
        out[id].push_back({e.tick, e.payload.at("x").get<double>(), e.payload.at("y").get<double>()});
    }
    return out;
}

LatencyReport latency_report(const LatencySampleSet& samples) {
    LatencyReport r;
    const auto s = samples.sorted();
    r.n = s.size();
    r.mean_ms = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(r.n);
    r.p50_ms = ecdf_quantile(samples, 0.5);
    r.p95_ms = ecdf_quantile(samples, 0.95);
    r.max_ms = s.back();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i + 1] == s[i]) continue;
        r.cdf_points.emplace_back(s[i], ecdf_eval(samples, s[i]));
    }
    return r;
}

Value to_value(const LatencyReport& r) {
    Value points = Value::array();
    for (const auto& [x, f] : r.cdf_points) points.push_back({x, f});
    return {{"n", r.n},           {"mean_ms", r.mean_ms}, {"p50_ms", r.p50_ms},
            {"p95_ms", r.p95_ms}, {"max_ms", r.max_ms},   {"cdf_points", points}};
}

std::string cdf_csv(const LatencyReport& r) {
    std::string out = "x_ms,fraction\n";
    for (const auto& [x, f] : r.cdf_points) out += format_number(x) + "," + format_number(f) + "\n";
    return out;
}

MapLatency map_update_latency(const RunLog& log, const std::string& delta_topic, const std::string& ack_topic) {
    std::map<std::string, Tick> published;  // delta id -> publish tick
    std::vector<std::string> order;
    std::map<std::string, Tick> acked;  // delta id -> first ack delivery tick
    bool any_delta = false;
    for (const auto& e : log.envelopes()) {
        if (e.topic == delta_topic && (e.kind == Kind::Pub || e.kind == Kind::Deliver)) any_delta = true;
        if (e.kind == Kind::Pub && e.topic == delta_topic) {
            const auto id = e.payload.at("delta_id").get<std::string>();
            if (published.emplace(id, e.tick).second) order.push_back(id);
        } else if (e.kind == Kind::Deliver && e.topic == ack_topic) {
            acked.emplace(e.payload.at("delta_id").get<std::string>(), e.tick);
        }
    }
    if (!any_delta)
        throw ConfigError("log has no '" + delta_topic + "' records; map-update latency needs the map authority's "
                          "delta topic and the '" + ack_topic + "' acknowledgements");
    MapLatency out;
    for (const auto& id : order) {
        auto it = acked.find(id);
        if (it == acked.end()) {
            out.unmatched.push_back(id);
            continue;
        }
        out.latencies_ms.emplace_back(id, static_cast<double>(it->second - published[id]) * log.header.tick_size_ms);
    }
    return out;
}

}  // namespace blueice
