#include "blueice/federates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blueice/canonical.hpp"
#include "blueice/config.hpp"

namespace blueice {

double normalize_angle(double a) {
    constexpr double kPi = std::numbers::pi;
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

VehicleState vehicle_step(const VehicleState& s, const ControlCommand& cmd, double dt_s, const VehicleLimits& limits) {
    const double steer = std::clamp(cmd.steer, -limits.max_steer, limits.max_steer);
    const double max_dv = limits.max_accel * dt_s;
    const double speed = std::max(0.0, s.speed + std::clamp(cmd.target_speed - s.speed, -max_dv, max_dv));

    VehicleState next = s;
    next.speed = speed;
    next.x = s.x + speed * std::cos(s.heading) * dt_s;
    next.y = s.y + speed * std::sin(s.heading) * dt_s;
    next.heading = normalize_angle(s.heading + (speed / s.wheelbase) * std::tan(steer) * dt_s);
    return next;
}

double car_following_accel(double gap_m, double v, double v_lead, const CarFollowingParams& p) {
    if (!(gap_m > 0.0)) throw CollisionFault("non-positive gap " + format_number(gap_m) + " m");
    const double a = p.gain_speed * (v_lead - v) + p.gain_gap * (gap_m - v * p.time_headway_s);
    return std::clamp(a, -p.max_decel, p.max_accel);
}

void platoon_step(std::vector<TrafficAgent>& agents, double dt_s) {
    std::vector<double> accel(agents.size(), 0.0);
    for (std::size_t i = 1; i < agents.size(); ++i) {
        const auto& lead = agents[i - 1];
        const auto& me = agents[i];
        const double gap = lead.position_s - lead.length - me.position_s;
        accel[i] = car_following_accel(gap, me.speed, lead.speed, me.params);
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
        auto& a = agents[i];
        a.speed = std::max(0.0, a.speed + accel[i] * dt_s);
        a.position_s += a.speed * dt_s;
    }
}

MapState map_apply_delta(MapState map, const MapDelta& delta) {
    auto it = map.find(delta.feature_id);
    if (it != map.end() && it->second.issued_tick > delta.issued_tick) return map;
    map[delta.feature_id] = delta;
    return map;
}

namespace {

std::string delta_id(const MapDelta& d) { return d.feature_id + "@" + std::to_string(d.issued_tick); }

Position position_from(const Value& v) {
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    return {};
}

}  // namespace

Value map_delta_to_value(const MapDelta& d) {
    return {{"delta_id", delta_id(d)},
            {"feature_id", d.feature_id},
            {"kind", d.kind},
            {"position", {d.position.x, d.position.y}},
            {"present", d.present},
            {"issued_tick", d.issued_tick}};
}

MapDelta map_delta_from_value(const Value& v) {
    MapDelta d;
    d.feature_id = v.at("feature_id").get<std::string>();
    d.kind = v.value("kind", "");
    d.position = position_from(v.value("position", Value()));
    d.present = v.value("present", true);
    d.issued_tick = v.value("issued_tick", Tick{0});
    return d;
}

double SpatDurations::of(SignalPhase p) const {
    switch (p) {
        case SignalPhase::Green: return green_ms;
        case SignalPhase::Yellow: return yellow_ms;
        case SignalPhase::Red: return red_ms;
    }
    return 0.0;
}

std::string_view to_string(SignalPhase p) {
    switch (p) {
        case SignalPhase::Green: return "GREEN";
        case SignalPhase::Yellow: return "YELLOW";
        case SignalPhase::Red: return "RED";
    }
    return "?";
}

SignalPhase phase_from_string(std::string_view s) {
    if (s == "GREEN") return SignalPhase::Green;
    if (s == "YELLOW") return SignalPhase::Yellow;
    if (s == "RED") return SignalPhase::Red;
    throw DecodeError("phase", "unknown signal phase '" + std::string(s) + "'");
}

SpatPayload spat_next(const SpatPayload& s, double dt_ms, const SpatDurations& durations) {
    SpatPayload next = s;
    next.time_to_change_ms -= dt_ms;
    if (next.time_to_change_ms <= 0.0) {
        switch (s.phase) {
            case SignalPhase::Green: next.phase = SignalPhase::Yellow; break;
            case SignalPhase::Yellow: next.phase = SignalPhase::Red; break;
            case SignalPhase::Red: next.phase = SignalPhase::Green; break;
        }
        next.time_to_change_ms = durations.of(next.phase);
    }
    return next;
}

Value spat_to_value(const SpatPayload& s) {
    return {{"intersection_id", s.intersection_id},
            {"phase", std::string(to_string(s.phase))},
            {"time_to_change_ms", s.time_to_change_ms}};
}

SpatPayload spat_from_value(const Value& v) {
    SpatPayload s;
    s.intersection_id = v.value("intersection_id", "");
    s.phase = phase_from_string(v.at("phase").get<std::string>());
    s.time_to_change_ms = v.value("time_to_change_ms", 0.0);
    return s;
}

Value bsm_to_value(const BsmPayload& b) {
    return {{"vehicle_id", b.vehicle_id}, {"x", b.x},         {"y", b.y},
            {"speed", b.speed},           {"heading", b.heading}, {"cv2x_equipped", b.cv2x_equipped}};
}

BsmPayload bsm_from_value(const Value& v) {
    BsmPayload b;
    b.vehicle_id = v.at("vehicle_id").get<std::string>();
    b.x = v.at("x").get<double>();
    b.y = v.at("y").get<double>();
    b.speed = v.value("speed", 0.0);
    b.heading = v.value("heading", 0.0);
    b.cv2x_equipped = v.value("cv2x_equipped", true);
    return b;
}

namespace {

double tick_seconds(const Value& welcome) { return welcome.value("tick_size_ms", 10.0) / 1000.0; }

}  // namespace

// --- VehicleFederate --------------------------------------------------------

VehicleFederate::VehicleFederate(std::string id, const Value& sc) : id_(std::move(id)) {
    const Value init = sc.value("initial", Value::object());
    state_.x = init.value("x", 0.0);
    state_.y = init.value("y", -20.0);
    state_.heading = normalize_angle(init.value("heading", 0.0));
    state_.speed = std::max(0.0, init.value("speed", 0.0));
    state_.wheelbase = sc.value("wheelbase", 2.7);
    if (!(state_.wheelbase > 0.0)) throw ConfigError("vehicle wheelbase must be positive");
    limits_.max_accel = sc.value("max_accel", limits_.max_accel);
    limits_.max_steer = sc.value("max_steer", limits_.max_steer);
    cruise_speed_ = sc.value("cruise_speed", cruise_speed_);
    steer_ = sc.value("steer", 0.02);
    stop_on_red_ = sc.value("stop_on_red", stop_on_red_);
    cv2x_equipped_ = sc.value("cv2x_equipped", cv2x_equipped_);
    bsm_topic_ = sc.value("bsm_topic", bsm_topic_);
    spat_topic_ = sc.value("spat_topic", spat_topic_);
    delta_topic_ = sc.value("delta_topic", delta_topic_);
    ack_topic_ = sc.value("ack_topic", ack_topic_);
}

void VehicleFederate::on_welcome(const Value& welcome) { dt_s_ = tick_seconds(welcome); }

std::vector<Publication> VehicleFederate::on_tick(Tick, const std::vector<Envelope>& deliveries) {
    std::vector<Publication> out;
    for (const auto& d : deliveries) {
        if (d.topic == spat_topic_) {
            phase_ = spat_from_value(d.payload).phase;
        } else if (d.topic == delta_topic_) {
            const MapDelta delta = map_delta_from_value(d.payload);
            map_ = map_apply_delta(std::move(map_), delta);
            out.push_back({ack_topic_,
                           Value{{"delta_id", delta_id(delta)},
                                 {"feature_id", delta.feature_id},
                                 {"issued_tick", delta.issued_tick}},
                           std::nullopt});
        }
    }
    const bool hold = stop_on_red_ && phase_ == SignalPhase::Red;
    state_ = vehicle_step(state_, {hold ? 0.0 : cruise_speed_, steer_}, dt_s_, limits_);
    out.push_back({bsm_topic_,
                   bsm_to_value({id_, state_.x, state_.y, state_.speed, state_.heading, cv2x_equipped_}),
                   std::nullopt});
    return out;
}

// --- TrafficFederate --------------------------------------------------------

std::vector<TrafficAgent> default_platoon() {
    const double speeds[] = {10.0, 12.0, 8.0, 11.0, 9.0};
    std::vector<TrafficAgent> agents;
    for (int i = 0; i < 5; ++i) {
        TrafficAgent a;
        a.id = "car" + std::to_string(i);
        a.position_s = 100.0 - 25.0 * i;
        a.speed = speeds[i];
        a.cv2x_equipped = i != 2;
        agents.push_back(a);
    }
    return agents;
}

TrafficFederate::TrafficFederate(std::string id, const Value& sc) : id_(std::move(id)) {
    topic_ = sc.value("topic", topic_);
    lane_y_ = sc.value("lane_y", lane_y_);
    const CarFollowingParams defaults;
    const Value dp = sc.value("params", Value::object());
    CarFollowingParams base;
    base.time_headway_s = dp.value("time_headway_s", defaults.time_headway_s);
    base.max_accel = dp.value("max_accel", defaults.max_accel);
    base.max_decel = dp.value("max_decel", defaults.max_decel);
    base.gain_speed = dp.value("gain_speed", defaults.gain_speed);
    base.gain_gap = dp.value("gain_gap", defaults.gain_gap);

    if (auto it = sc.find("agents"); it != sc.end() && !it->empty()) {
        for (const auto& av : *it) {
            TrafficAgent a;
            a.id = av.at("id").get<std::string>();
            a.position_s = av.at("position_s").get<double>();
            a.speed = std::max(0.0, av.value("speed", 0.0));
            a.cv2x_equipped = av.value("cv2x_equipped", true);
            a.length = av.value("length", a.length);
            const Value ap = av.value("params", Value::object());
            a.params.time_headway_s = ap.value("time_headway_s", base.time_headway_s);
            a.params.max_accel = ap.value("max_accel", base.max_accel);
            a.params.max_decel = ap.value("max_decel", base.max_decel);
            a.params.gain_speed = ap.value("gain_speed", base.gain_speed);
            a.params.gain_gap = ap.value("gain_gap", base.gain_gap);
            agents_.push_back(std::move(a));
        }
    } else {
        agents_ = default_platoon();
        for (auto& a : agents_) a.params = base;
    }
    for (std::size_t i = 1; i < agents_.size(); ++i) {
        if (agents_[i].position_s >= agents_[i - 1].position_s)
            throw ConfigError("traffic agents must be listed front to back");
    }
}

void TrafficFederate::on_welcome(const Value& welcome) { dt_s_ = tick_seconds(welcome); }

std::vector<Publication> TrafficFederate::on_tick(Tick, const std::vector<Envelope>&) {
    platoon_step(agents_, dt_s_);
    std::vector<Publication> out;
    out.reserve(agents_.size());
    for (const auto& a : agents_) {
        out.push_back({topic_, bsm_to_value({a.id, a.position_s, lane_y_, a.speed, 0.0, a.cv2x_equipped}),
                       std::nullopt});
    }
    return out;
}

// --- InfraFederate ----------------------------------------------------------

InfraFederate::InfraFederate(std::string id, const Value& sc) : id_(std::move(id)) {
    spat_topic_ = sc.value("spat_topic", spat_topic_);
    delta_topic_ = sc.value("delta_topic", delta_topic_);
    ack_topic_ = sc.value("ack_topic", ack_topic_);
    const Value sp = sc.value("spat", Value::object());
    durations_.green_ms = sp.value("green_ms", durations_.green_ms);
    durations_.yellow_ms = sp.value("yellow_ms", durations_.yellow_ms);
    durations_.red_ms = sp.value("red_ms", durations_.red_ms);
    spat_.intersection_id = sc.value("intersection_id", "int1");
    spat_.phase = phase_from_string(sp.value("initial_phase", "GREEN"));
    spat_.time_to_change_ms = sp.value("time_to_change_ms", durations_.of(spat_.phase));

    Value features = sc.value("features", Value::array({Value{{"feature_id", "stop_1"},
                                                               {"kind", "stop_sign"},
                                                               {"position", {50.0, -20.0}},
                                                               {"present", true}}}));
    for (const auto& f : features) map_ = map_apply_delta(std::move(map_), map_delta_from_value(f));

    Value deltas = sc.value("deltas", Value::array({Value{{"tick", 100}, {"feature_id", "stop_1"},
                                                           {"kind", "stop_sign"}, {"position", {50.0, -20.0}},
                                                           {"present", false}},
                                                     Value{{"tick", 600}, {"feature_id", "stop_1"},
                                                           {"kind", "stop_sign"}, {"position", {50.0, -20.0}},
                                                           {"present", true}}}));
    for (const auto& d : deltas) {
        MapDelta delta = map_delta_from_value(d);
        delta.issued_tick = d.at("tick").get<Tick>();
        schedule_.emplace(delta.issued_tick, delta);
    }
}

void InfraFederate::on_welcome(const Value& welcome) { dt_ms_ = welcome.value("tick_size_ms", 10.0); }

std::vector<Publication> InfraFederate::on_tick(Tick tick, const std::vector<Envelope>& deliveries) {
    for (const auto& d : deliveries) {
        if (d.topic != ack_topic_) continue;
        const auto id = d.payload.at("delta_id").get<std::string>();
        if (auto it = in_flight_.find(id); it != in_flight_.end()) {
            acked_[id] = it->second;
            in_flight_.erase(it);
        }
    }
    std::vector<Publication> out;
    out.push_back({spat_topic_, spat_to_value(spat_), std::nullopt});
    spat_ = spat_next(spat_, dt_ms_, durations_);

    auto [first, last] = schedule_.equal_range(tick);
    for (auto it = first; it != last; ++it) {
        map_ = map_apply_delta(std::move(map_), it->second);
        in_flight_[delta_id(it->second)] = tick;
        out.push_back({delta_topic_, map_delta_to_value(it->second), std::nullopt});
    }
    return out;
}

// --- ReplayFederate ---------------------------------------------------------

ReplayFederate::ReplayFederate(std::string id, ReplaySchedule schedule, bool check_config_hash)
    : id_(std::move(id)), schedule_(std::move(schedule)), check_hash_(check_config_hash) {}

void ReplayFederate::on_welcome(const Value& welcome) {
    const double tick_ms = welcome.value("tick_size_ms", 0.0);
    if (tick_ms != schedule_.header.tick_size_ms)
        throw ConfigError("replay log recorded with tick_size_ms " + format_number(schedule_.header.tick_size_ms) +
                          " but federation runs " + format_number(tick_ms));
    if (check_hash_ && welcome.value("config_hash", "") != hash_hex(schedule_.header.config_hash))
        throw ConfigError("replay log config_hash " + hash_hex(schedule_.header.config_hash) +
                          " does not match federation " + welcome.value("config_hash", ""));
}

std::vector<Publication> ReplayFederate::on_tick(Tick tick, const std::vector<Envelope>&) {
    std::vector<Publication> out;
    for (auto& e : replay_step(schedule_, tick)) out.push_back({e.topic, std::move(e.payload), e.seq});
    return out;
}

std::unique_ptr<FederateLogic> make_demo_federate(const std::string& command, const std::string& id,
                                                  const Value& scenario) {
    if (command == "vehicle") return std::make_unique<VehicleFederate>(id, scenario);
    if (command == "traffic") return std::make_unique<TrafficFederate>(id, scenario);
    if (command == "infra") return std::make_unique<InfraFederate>(id, scenario);
    throw ConfigError("unknown demo federate '" + command + "'");
}

}  // namespace blueice
