#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blueice/config.hpp"
#include "blueice/prng.hpp"
#include "blueice/timesync.hpp"

namespace blueice {

/// True iff `payload` has a value at the dot-separated `field_path` equal to the
/// filter's required value. A missing path is false, never an error.
bool apply_filter(const TopicFilter& filter, const Value& payload);

/// Topic router: authentication, access control, selective-publication filters,
/// and per-link delay/loss injection. Single-threaded; owned by the coordinator.
class Bus {
public:
    explicit Bus(const FederationConfig& config);

    /// Checks id and token against the config and marks the federate registered.
    /// Throws ProtocolError "UNKNOWN_ID", "DUP_ID" or "AUTH"; state is unchanged on error.
    void register_federate(std::string_view id, std::string_view token);

    bool is_registered(const std::string& id) const { return registered_.contains(id); }
    const std::set<std::string>& registered() const noexcept { return registered_; }

    /// True iff `federate` is an allowed publisher of `topic`. Throws ProtocolError "NO_TOPIC".
    bool authorize_publish(const std::string& federate, const std::string& topic) const;

    /// Declared subscriptions the policy also allows.
    std::vector<std::string> effective_subscriptions(const std::string& federate) const;

    /// Fans a PUB out to every authorized subscriber other than the publisher, in
    /// lexicographic id order, drawing loss then delay from each link's own stream.
    std::vector<DeliveryRecord> route(const Envelope& pub);

    /// Delay model and loss probability in force for one link and payload.
    struct LinkParams {
        const DelayModel* delay;
        double loss_probability;
    };
    LinkParams link_params(const std::string& topic, const std::string& src, const std::string& dst,
                           const Value& payload) const;

    PrngState& link_stream(const std::string& topic, const std::string& src, const std::string& dst);

private:
    const FederationConfig& config_;
    std::set<std::string> registered_;
    std::map<std::string, std::set<std::string>> subscribers_;  // topic -> federate ids
    std::map<std::string, PrngState> streams_;
    DelayModel zero_delay_ = DelayModel::constant(0.0);
};

}  // namespace blueice
