#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "blueice/clock.hpp"
#include "blueice/envelope.hpp"
#include "blueice/netmodel.hpp"

namespace blueice {

/// A simulator's identity, declared topics, and shared-secret token.
struct FederateDescriptor {
    std::string id;
    std::set<std::string> publishes;
    std::set<std::string> subscribes;
    std::string token;
    std::optional<Position> position;
    Value launch;  // {"command": ..., "scenario": ...}; null for external federates
};

struct AccessPolicy {
    std::string topic;
    std::set<std::string> allowed_publishers;
    std::set<std::string> allowed_subscribers;
};

/// Selective publication: PUBs on `topic` route only when payload[field_path] == required_value.
struct TopicFilter {
    std::string topic;
    std::string field_path;
    Value required_value;
};

inline constexpr const char* kStationNearest = "STATION_NEAREST";

/// Delay/loss assignment for a (topic, src, dst) link. Empty src/dst match any federate.
struct LinkRule {
    std::string topic;
    std::string src;
    std::string dst;
    std::string model;  // STATION_NEAREST or a key of FederationConfig::delay_models
    std::optional<double> loss_probability;
};

struct FederationConfig {
    double tick_size_ms = 10.0;
    Tick max_ticks = 1000;
    std::uint64_t global_seed = 0;
    std::string listen_address = "127.0.0.1:7447";
    double tick_timeout_s = 30.0;
    bool late_join = false;
    std::size_t max_record_bytes = 1u << 20;

    std::vector<FederateDescriptor> federates;  // sorted by id
    std::map<std::string, AccessPolicy> policies;
    std::vector<TopicFilter> filters;
    std::map<std::string, DelayModel> delay_models;
    std::vector<LatencyStation> stations;
    std::vector<LinkRule> links;

    Value document;  // the source document this config was built from

    const FederateDescriptor* find_federate(const std::string& id) const;
};

/// One problem found while checking a config, anchored at a config path.
struct Diagnostic {
    std::string path;
    std::string message;
};

std::string to_string(const Diagnostic& d);

/// Checks structure, ranges, and every cross-reference; returns all problems found.
std::vector<Diagnostic> validate_config(const Value& document);

/// Builds a config; throws ConfigError listing every diagnostic if the document is invalid.
FederationConfig parse_config(const Value& document);

/// Reads and parses a config file (one canonical structured-text document).
FederationConfig load_config(const std::string& path);
Value load_document(const std::string& path);

/// fnv1a64 of the canonical config with deployment-only fields
/// (listen_address, per-federate launch) removed.
std::uint64_t config_hash(const Value& document);
std::string hash_hex(std::uint64_t h);

DelayModel parse_delay_model(const Value& v);
Value delay_model_to_value(const DelayModel& m);

}  // namespace blueice
