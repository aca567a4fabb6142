#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blueice/error.hpp"
#include "blueice/federate.hpp"
#include "blueice/netmodel.hpp"
#include "blueice/recorder.hpp"

namespace blueice {

// ---------------------------------------------------------------------------
// Vehicle kinematics

struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // radians, (-pi, pi]
    double speed = 0.0;    // m/s, >= 0
    double wheelbase = 2.7;
};

struct ControlCommand {
    double target_speed = 0.0;
    double steer = 0.0;
};

struct VehicleLimits {
    double max_accel = 2.0;  // m/s^2, symmetric
    double max_steer = 0.6;  // rad
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

/// One forward-Euler step of the kinematic bicycle model. Speed moves toward the
/// target by at most max_accel*dt and never goes negative; steer is clamped.
VehicleState vehicle_step(const VehicleState& state, const ControlCommand& cmd, double dt_s,
                          const VehicleLimits& limits = {});

// ---------------------------------------------------------------------------
// Background traffic

struct CarFollowingParams {
    double time_headway_s = 1.5;
    double max_accel = 3.0;
    double max_decel = 3.0;
    double gain_speed = 0.5;
    double gain_gap = 0.1;
};

struct TrafficAgent {
    std::string id;
    double position_s = 0.0;  // front bumper, meters along the road
    double speed = 0.0;
    CarFollowingParams params;
    bool cv2x_equipped = true;
    double length = 4.5;
};

/// Raised when a follower's gap is no longer positive.
class CollisionFault : public Error {
public:
    using Error::Error;
};

/// Linear time-headway law, clamped to [-max_decel, max_accel].
/// Throws CollisionFault for gap_m <= 0.
double car_following_accel(double gap_m, double v, double v_lead, const CarFollowingParams& params);

/// Advances a single-lane platoon one step. agents[0] is the leader and keeps its
/// speed; every follower reacts to the agent directly ahead (simultaneous update).
void platoon_step(std::vector<TrafficAgent>& agents, double dt_s);

// ---------------------------------------------------------------------------
// Map authority

struct MapFeature {
    std::string feature_id;
    std::string kind;
    Position position;
    bool present = true;
    Tick issued_tick = 0;

    friend bool operator==(const MapFeature&, const MapFeature&) = default;
};

using MapDelta = MapFeature;
using MapState = std::map<std::string, MapFeature>;

/// Upserts the feature unless the map already holds a newer issued_tick.
MapState map_apply_delta(MapState map, const MapDelta& delta);

Value map_delta_to_value(const MapDelta& d);
MapDelta map_delta_from_value(const Value& v);

// ---------------------------------------------------------------------------
// Signal phase and timing

enum class SignalPhase { Green, Yellow, Red };

struct SpatPayload {
    std::string intersection_id;
    SignalPhase phase = SignalPhase::Green;
    double time_to_change_ms = 0.0;

    friend bool operator==(const SpatPayload&, const SpatPayload&) = default;
};

struct SpatDurations {
    double green_ms = 3000.0;
    double yellow_ms = 1000.0;
    double red_ms = 2000.0;

    double of(SignalPhase p) const;
};

std::string_view to_string(SignalPhase p);
SignalPhase phase_from_string(std::string_view s);

/// Counts the timer down; at or below zero the phase advances
/// GREEN -> YELLOW -> RED -> GREEN and the timer reloads.
SpatPayload spat_next(const SpatPayload& payload, double dt_ms, const SpatDurations& durations);

Value spat_to_value(const SpatPayload& s);
SpatPayload spat_from_value(const Value& v);

struct BsmPayload {
    std::string vehicle_id;
    double x = 0.0;
    double y = 0.0;
    double speed = 0.0;
    double heading = 0.0;
    bool cv2x_equipped = true;
};

Value bsm_to_value(const BsmPayload& b);
BsmPayload bsm_from_value(const Value& v);

// ---------------------------------------------------------------------------
// Demo federates. Scenarios are structured values; every field has a default.

/// Kinematic ego vehicle: publishes a BSM every tick, stops for RED when enabled,
/// and acknowledges map deltas.
class VehicleFederate : public FederateLogic {
public:
    explicit VehicleFederate(std::string id, const Value& scenario = Value::object());

    void on_welcome(const Value& welcome) override;
    std::vector<Publication> on_tick(Tick tick, const std::vector<Envelope>& deliveries) override;

    const VehicleState& state() const noexcept { return state_; }
    const MapState& map() const noexcept { return map_; }

private:
    std::string id_;
    VehicleState state_;
    VehicleLimits limits_;
    double cruise_speed_ = 8.0;
    double steer_ = 0.0;
    bool stop_on_red_ = true;
    bool cv2x_equipped_ = true;
    std::string bsm_topic_ = "bsm";
    std::string spat_topic_ = "spat";
    std::string delta_topic_ = "map_delta";
    std::string ack_topic_ = "map_ack";
    std::optional<SignalPhase> phase_;
    MapState map_;
    double dt_s_ = 0.01;
};

/// Single-lane platoon with a constant-speed leader; one BSM per agent per tick.
class TrafficFederate : public FederateLogic {
public:
    explicit TrafficFederate(std::string id, const Value& scenario = Value::object());

    void on_welcome(const Value& welcome) override;
    std::vector<Publication> on_tick(Tick tick, const std::vector<Envelope>& deliveries) override;

    const std::vector<TrafficAgent>& agents() const noexcept { return agents_; }

private:
    std::string id_;
    std::vector<TrafficAgent> agents_;
    std::string topic_ = "traffic_bsm";
    double lane_y_ = 0.0;
    double dt_s_ = 0.01;
};

/// Default five-agent platoon used when a traffic scenario lists no agents.
std::vector<TrafficAgent> default_platoon();

/// Intersection signal plus map authority: SPaT every tick, scripted map deltas,
/// and bookkeeping of acknowledgements.
class InfraFederate : public FederateLogic {
public:
    explicit InfraFederate(std::string id, const Value& scenario = Value::object());

    void on_welcome(const Value& welcome) override;
    std::vector<Publication> on_tick(Tick tick, const std::vector<Envelope>& deliveries) override;

    const MapState& map() const noexcept { return map_; }
    /// Delta ids published but not yet acknowledged.
    const std::map<std::string, Tick>& in_flight() const noexcept { return in_flight_; }
    const std::map<std::string, Tick>& acked() const noexcept { return acked_; }

private:
    std::string id_;
    SpatPayload spat_;
    SpatDurations durations_;
    std::string spat_topic_ = "spat";
    std::string delta_topic_ = "map_delta";
    std::string ack_topic_ = "map_ack";
    MapState map_;
    std::multimap<Tick, MapDelta> schedule_;
    std::map<std::string, Tick> in_flight_;
    std::map<std::string, Tick> acked_;
    double dt_ms_ = 10.0;
};

/// Republishes recorded PUBs at their original ticks with their original seq.
/// Refuses to start when the federation's tick size or config hash differs from the log's.
class ReplayFederate : public FederateLogic {
public:
    ReplayFederate(std::string id, ReplaySchedule schedule, bool check_config_hash = true);

    void on_welcome(const Value& welcome) override;
    std::vector<Publication> on_tick(Tick tick, const std::vector<Envelope>& deliveries) override;

private:
    std::string id_;
    ReplaySchedule schedule_;
    bool check_hash_;
};

/// Builds a demo federate by subcommand name ("vehicle", "traffic", "infra").
std::unique_ptr<FederateLogic> make_demo_federate(const std::string& command, const std::string& id,
                                                  const Value& scenario);

}  // namespace blueice
