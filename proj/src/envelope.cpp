#include "blueice/envelope.hpp"

#include <array>
#include <utility>

namespace blueice {
namespace {

constexpr std::array<std::pair<Kind, std::string_view>, 8> kKindNames{{
    {Kind::Hello, "HELLO"},
    {Kind::Welcome, "WELCOME"},
    {Kind::Tick, "TICK"},
    {Kind::TickDone, "TICK_DONE"},
    {Kind::Pub, "PUB"},
    {Kind::Deliver, "DELIVER"},
    {Kind::Bye, "BYE"},
    {Kind::Error, "ERROR"},
}};

}  // namespace

std::string_view to_string(Kind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "?";
}

std::optional<Kind> kind_from_string(std::string_view text) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (name == text) return k;
    }
    return std::nullopt;
}

Envelope make_hello(std::string federate, std::string token) {
    Envelope e;
    e.kind = Kind::Hello;
    e.federate = std::move(federate);
    e.token = std::move(token);
    return e;
}

Envelope make_tick(std::string federate, Tick tick) {
    Envelope e;
    e.kind = Kind::Tick;
    e.federate = std::move(federate);
    e.tick = tick;
    return e;
}

Envelope make_tick_done(std::string federate, Tick tick) {
    Envelope e;
    e.kind = Kind::TickDone;
    e.federate = std::move(federate);
    e.tick = tick;
    return e;
}

Envelope make_pub(std::string federate, Tick tick, std::string topic, std::uint64_t seq,
                  Value payload) {
    Envelope e;
    e.kind = Kind::Pub;
    e.federate = std::move(federate);
    e.tick = tick;
    e.topic = std::move(topic);
    e.seq = seq;
    e.payload = std::move(payload);
    return e;
}

Envelope make_error(std::string federate, std::string code, std::string detail) {
    Envelope e;
    e.kind = Kind::Error;
    e.federate = std::move(federate);
    e.error_code = std::move(code);
    if (!detail.empty()) e.payload = Value{{"detail", std::move(detail)}};
    return e;
}

Envelope make_bye(std::string federate, Tick tick) {
    Envelope e;
    e.kind = Kind::Bye;
    e.federate = std::move(federate);
    e.tick = tick;
    return e;
}

}  // namespace blueice
