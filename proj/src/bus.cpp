#include "blueice/bus.hpp"

#include <algorithm>

#include "blueice/error.hpp"

namespace blueice {

bool apply_filter(const TopicFilter& filter, const Value& payload) {
    const Value* node = &payload;
    std::string_view path = filter.field_path;
    while (true) {
        const auto dot = path.find('.');
        const std::string key(path.substr(0, dot));
        if (!node->is_object()) return false;
        auto it = node->find(key);
        if (it == node->end()) return false;
        node = &*it;
        if (dot == std::string_view::npos) break;
        path.remove_prefix(dot + 1);
    }
    if (node->is_structured()) return false;
    return *node == filter.required_value;
}

Bus::Bus(const FederationConfig& config) : config_(config) {
    for (const auto& f : config_.federates) {
        for (const auto& topic : f.subscribes) {
            auto pol = config_.policies.find(topic);
            if (pol != config_.policies.end() && pol->second.allowed_subscribers.contains(f.id))
                subscribers_[topic].insert(f.id);
        }
    }
}

void Bus::register_federate(std::string_view id, std::string_view token) {
    const auto* desc = config_.find_federate(std::string(id));
    if (!desc) throw ProtocolError("UNKNOWN_ID", "unknown federate '" + std::string(id) + "'");
    if (registered_.contains(desc->id)) throw ProtocolError("DUP_ID", "federate '" + desc->id + "' already joined");
    if (desc->token != token) throw ProtocolError("AUTH", "bad token for federate '" + desc->id + "'");
    registered_.insert(desc->id);
}

bool Bus::authorize_publish(const std::string& federate, const std::string& topic) const {
    auto it = config_.policies.find(topic);
    if (it == config_.policies.end()) throw ProtocolError("NO_TOPIC", "topic '" + topic + "' is not configured");
    return it->second.allowed_publishers.contains(federate);
}

std::vector<std::string> Bus::effective_subscriptions(const std::string& federate) const {
    std::vector<std::string> out;
    for (const auto& [topic, subs] : subscribers_) {
        if (subs.contains(federate)) out.push_back(topic);
    }
    return out;
}

PrngState& Bus::link_stream(const std::string& topic, const std::string& src, const std::string& dst) {
    std::string key = topic;
    key.append("|").append(src).append("|").append(dst);
    auto it = streams_.find(key);
    if (it == streams_.end())
        it = streams_.emplace(std::move(key), PrngState{derive_link_seed(config_.global_seed, topic, src, dst)}).first;
    return it->second;
}

Bus::LinkParams Bus::link_params(const std::string& topic, const std::string& src, const std::string& dst,
                                 const Value& payload) const {
    // Most specific rule wins: (topic,src,dst) > (topic,src,*) > (topic,*,dst) > (topic,*,*) > default.
    const LinkRule* best = nullptr;
    int best_score = -1;
    for (const auto& rule : config_.links) {
        if (!rule.topic.empty() && rule.topic != topic) continue;
        if (!rule.src.empty() && rule.src != src) continue;
        if (!rule.dst.empty() && rule.dst != dst) continue;
        const int score = (rule.topic.empty() ? 0 : 4) + (rule.src.empty() ? 0 : 2) + (rule.dst.empty() ? 0 : 1);
        if (score > best_score) {
            best = &rule;
            best_score = score;
        }
    }
    if (!best || best->model.empty()) {
        return {&zero_delay_, best && best->loss_probability ? *best->loss_probability : 0.0};
    }
    if (best->model == kStationNearest) {
        Position pos{};
        if (payload.is_object() && payload.contains("x") && payload.contains("y") && payload["x"].is_number() &&
            payload["y"].is_number()) {
            pos = {payload["x"].get<double>(), payload["y"].get<double>()};
        } else if (const auto* d = config_.find_federate(src); d && d->position) {
            pos = *d->position;
        } else {
            throw ConfigError("no position for STATION_NEAREST publisher '" + src + "'");
        }
        const auto& station = nearest_station(pos, config_.stations);
        return {&station.delay, best->loss_probability.value_or(station.loss_probability)};
    }
    return {&config_.delay_models.at(best->model), best->loss_probability.value_or(0.0)};
}

std::vector<DeliveryRecord> Bus::route(const Envelope& pub) {
    std::vector<DeliveryRecord> out;
    auto subs = subscribers_.find(pub.topic);
    if (subs == subscribers_.end()) return out;

    for (const auto& filter : config_.filters) {
        if (filter.topic == pub.topic && !apply_filter(filter, pub.payload)) return out;
    }

    for (const auto& dest : subs->second) {  // std::set: lexicographic
        if (dest == pub.federate) continue;
        const auto params = link_params(pub.topic, pub.federate, dest, pub.payload);
        PrngState& stream = link_stream(pub.topic, pub.federate, dest);
        if (sample_loss(params.loss_probability, stream)) continue;
        const double delay = sample_delay(*params.delay, stream);

        DeliveryRecord rec;
        rec.envelope = pub;
        rec.envelope.kind = Kind::Deliver;
        rec.envelope.dest = dest;
        rec.dest = dest;
        rec.send_tick = pub.tick;
        rec.delivery_tick = schedule(pub.tick, delay, config_.tick_size_ms);
        rec.envelope.tick = rec.delivery_tick;
        rec.delay_ms = delay;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace blueice
