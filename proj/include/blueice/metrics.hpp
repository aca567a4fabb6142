#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "blueice/clock.hpp"
#include "blueice/netmodel.hpp"
#include "blueice/recorder.hpp"

namespace blueice {

struct TrajectoryPoint {
    Tick tick = 0;
    double x = 0.0;
    double y = 0.0;
};

/// Ordered (tick, x, y) samples; ticks strictly increasing.
using Trajectory = std::vector<TrajectoryPoint>;

/// Root-mean-square planar position error over a shared tick set.
/// Throws ConfigError listing ticks present in only one trajectory.
double rmse(const Trajectory& a, const Trajectory& b);

/// CSV with `tick,x,y` rows; an optional header row is skipped.
Trajectory load_trajectory_csv(const std::string& path);

/// Per-vehicle trajectories from the PUB records on `topic` (payload vehicle_id, x, y).
std::map<std::string, Trajectory> trajectories_from_log(const RunLog& log, const std::string& topic);

struct LatencyReport {
    std::size_t n = 0;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double max_ms = 0.0;
    std::vector<std::pair<double, double>> cdf_points;  // (x_ms, ECDF(x)) at each distinct sample
};

LatencyReport latency_report(const LatencySampleSet& samples);
Value to_value(const LatencyReport& report);
std::string cdf_csv(const LatencyReport& report);

struct MapLatency {
    std::vector<std::pair<std::string, double>> latencies_ms;  // delta id -> latency
    std::vector<std::string> unmatched;                        // deltas never acknowledged
};

/// (ack delivery tick - delta publish tick) * tick_size_ms per delta, from a run log.
/// Throws ConfigError when the log carries no records on the delta topic.
MapLatency map_update_latency(const RunLog& log, const std::string& delta_topic = "map_delta",
                              const std::string& ack_topic = "map_ack");

}  // namespace blueice
