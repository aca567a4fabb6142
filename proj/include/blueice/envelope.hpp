#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "blueice/clock.hpp"

namespace blueice {

/// Structured payload tree (maps, lists, strings, numbers, booleans, null).
using Value = nlohmann::json;

constexpr int kProtocolVersion = 1;

enum class Kind { Hello, Welcome, Tick, TickDone, Pub, Deliver, Bye, Error };

std::string_view to_string(Kind kind) noexcept;
std::optional<Kind> kind_from_string(std::string_view text) noexcept;

/// The single record type used on the wire and in run logs.
struct Envelope {
    Kind kind = Kind::Tick;
    int protocol_version = kProtocolVersion;
    std::string federate;  // sender; recipient for TICK/WELCOME/BYE/ERROR; source for DELIVER
    Tick tick = 0;
    std::string topic;
    std::uint64_t seq = 0;
    Value payload;
    std::string token;
    std::string error_code;
    std::string dest;  // DELIVER only

    friend bool operator==(const Envelope&, const Envelope&) = default;
};

Envelope make_hello(std::string federate, std::string token);
Envelope make_tick(std::string federate, Tick tick);
Envelope make_tick_done(std::string federate, Tick tick);
Envelope make_pub(std::string federate, Tick tick, std::string topic, std::uint64_t seq,
                  Value payload);
Envelope make_error(std::string federate, std::string code, std::string detail = {});
Envelope make_bye(std::string federate, Tick tick);

}  // namespace blueice
