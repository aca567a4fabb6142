#include <gtest/gtest.h>

#include "blueice/bus.hpp"
#include "blueice/error.hpp"
#include "fixtures.hpp"

using namespace blueice;
using blueice::testing::config_doc;

namespace {

std::string code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ProtocolError& e) {
        return e.code();
    }
    return "none";
}

FederationConfig demo() { return load_config(blueice::testing::configs_dir() + "/demo.json"); }

}  // namespace

TEST(Bus, RegistrationErrors) {
    const auto cfg = demo();
    Bus bus(cfg);
    EXPECT_EQ(code_of([&] { bus.register_federate("ghost", "x"); }), "UNKNOWN_ID");
    EXPECT_EQ(code_of([&] { bus.register_federate("vehicle", "wrong"); }), "AUTH");
    EXPECT_FALSE(bus.is_registered("vehicle"));
    EXPECT_EQ(code_of([&] { bus.register_federate("vehicle", "veh-secret"); }), "none");
    EXPECT_EQ(code_of([&] { bus.register_federate("vehicle", "veh-secret"); }), "DUP_ID");
}

TEST(Bus, AuthorizePublish) {
    const auto cfg = demo();
    Bus bus(cfg);
    EXPECT_TRUE(bus.authorize_publish("vehicle", "bsm"));
    EXPECT_FALSE(bus.authorize_publish("vehicle", "spat"));
    EXPECT_EQ(code_of([&] { bus.authorize_publish("vehicle", "nope"); }), "NO_TOPIC");
}

TEST(Bus, EffectiveSubscriptionsRespectPolicy) {
    auto doc = config_doc({"a", "b"}, {{"t", {"a"}, {"b"}}, {"u", {"a"}, {}}});
    doc["federates"][1]["subscribes"].push_back("u");  // declared but not allowed
    const auto cfg = parse_config(doc);
    Bus bus(cfg);
    EXPECT_EQ(bus.effective_subscriptions("b"), std::vector<std::string>{"t"});
    EXPECT_TRUE(bus.route(make_pub("a", 0, "u", 0, Value::object())).empty());
}

TEST(Bus, RouteFansOutInIdOrderSkippingPublisher) {
    const auto cfg = parse_config(config_doc({"c", "a", "b"}, {{"t", {"a", "b", "c"}, {"a", "b", "c"}}}));
    Bus bus(cfg);
    const auto out = bus.route(make_pub("b", 4, "t", 0, Value{{"v", 1}}));
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].dest, "a");
    EXPECT_EQ(out[1].dest, "c");
    EXPECT_EQ(out[0].envelope.kind, Kind::Deliver);
    EXPECT_EQ(out[0].envelope.federate, "b");
    EXPECT_EQ(out[0].envelope.dest, "a");
    EXPECT_EQ(out[0].delivery_tick, 5u);
    EXPECT_EQ(out[0].envelope.tick, 5u);
}

TEST(Bus, FilterDropsUnequippedTraffic) {
    const auto cfg = demo();
    Bus bus(cfg);
    const Value unequipped{{"vehicle_id", "car2"}, {"x", 50}, {"y", 0}, {"cv2x_equipped", false}};
    EXPECT_TRUE(bus.route(make_pub("traffic", 0, "traffic_bsm", 0, unequipped)).empty());
    int routed = 0;
    for (int i = 0; i < 20; ++i) {
        Value v = unequipped;
        v["cv2x_equipped"] = true;
        routed += !bus.route(make_pub("traffic", 0, "traffic_bsm", i, v)).empty();
    }
    EXPECT_GT(routed, 15);
}

TEST(Bus, ApplyFilterPaths) {
    const TopicFilter f{"t", "meta.flags.ok", true};
    EXPECT_TRUE(apply_filter(f, Value::parse(R"({"meta":{"flags":{"ok":true}}})")));
    EXPECT_FALSE(apply_filter(f, Value::parse(R"({"meta":{"flags":{"ok":false}}})")));
    EXPECT_FALSE(apply_filter(f, Value::parse(R"({"meta":{}})")));
    EXPECT_FALSE(apply_filter(f, Value::parse(R"({"meta":3})")));
    EXPECT_FALSE(apply_filter(f, Value::parse(R"([1,2])")));
}

TEST(Bus, LossOneOnSingleLink) {
    auto doc = config_doc({"a", "b", "c"}, {{"t", {"a"}, {"b", "c"}}});
    doc["links"] = Value::array({{{"topic", "t"}, {"dst", "b"}, {"model", "z"}, {"loss_probability", 1.0}}});
    doc["delay_models"] = {{"z", {{"kind", "CONSTANT"}, {"constant_ms", 0}}}};
    const auto cfg = parse_config(doc);
    Bus bus(cfg);
    for (int i = 0; i < 100; ++i) {
        const auto out = bus.route(make_pub("a", i, "t", i, Value::object()));
        ASSERT_EQ(out.size(), 1u);
        EXPECT_EQ(out[0].dest, "c");
    }
}

TEST(Bus, MostSpecificLinkWins) {
    auto doc = config_doc({"a", "b"}, {{"t", {"a", "b"}, {"a", "b"}}});
    doc["delay_models"] = {{"slow", {{"kind", "CONSTANT"}, {"constant_ms", 50}}},
                           {"fast", {{"kind", "CONSTANT"}, {"constant_ms", 5}}}};
    doc["links"] = Value::array({{{"topic", "t"}, {"model", "slow"}}, {{"topic", "t"}, {"src", "a"}, {"model", "fast"}}});
    const auto cfg = parse_config(doc);
    Bus bus(cfg);
    EXPECT_EQ(bus.link_params("t", "a", "b", {}).delay->constant_ms, 5.0);
    EXPECT_EQ(bus.link_params("t", "b", "a", {}).delay->constant_ms, 50.0);
    EXPECT_EQ(bus.link_params("other", "b", "a", {}).delay->constant_ms, 0.0);
}

TEST(Bus, StationNearestUsesPayloadPosition) {
    const auto cfg = demo();
    Bus bus(cfg);
    EXPECT_EQ(bus.link_params("bsm", "vehicle", "infra", Value{{"x", 1}, {"y", -19}}).loss_probability, 0.02);
    EXPECT_EQ(bus.link_params("bsm", "vehicle", "infra", Value{{"x", 79}, {"y", 1}}).loss_probability, 0.05);
    // No coordinates in the payload: the publisher's configured position (50, 0) is nearer obu_b.
    EXPECT_EQ(bus.link_params("traffic_bsm", "traffic", "infra", Value::object()).loss_probability, 0.05);
}

TEST(Bus, LinkStreamsAreIndependentAndSeeded) {
    const auto cfg = demo();
    Bus a(cfg), b(cfg);
    PrngState expect{derive_link_seed(cfg.global_seed, "spat", "infra", "vehicle")};
    EXPECT_EQ(a.link_stream("spat", "infra", "vehicle"), expect);
    for (int i = 0; i < 50; ++i) {
        const auto ra = a.route(make_pub("infra", i, "spat", i, Value::object()));
        const auto rb = b.route(make_pub("infra", i, "spat", i, Value::object()));
        ASSERT_EQ(ra.size(), rb.size());
        if (!ra.empty()) ASSERT_EQ(ra[0].delivery_tick, rb[0].delivery_tick);
    }
}
