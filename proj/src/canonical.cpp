#include "blueice/canonical.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "blueice/error.hpp"

namespace blueice {
namespace {

constexpr double kTwoPow53 = 9007199254740992.0;

void encode_string(std::string_view s, std::string& out) {
    out.push_back('"');
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (u < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", u);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

template <typename Int>
void append_integer(Int v, std::string& out) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

}  // namespace

std::string format_number(double v) {
    if (!std::isfinite(v)) throw EncodeError("non-finite number in payload");
    std::string out;
    if (v == std::floor(v) && std::fabs(v) < kTwoPow53) {
        append_integer(static_cast<std::int64_t>(v), out);
        return out;
    }

    // Shortest round-trip digits, then laid out like Python's float repr.
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
    std::string_view sci(buf, static_cast<std::size_t>(end - buf));
    const bool negative = sci.front() == '-';
    if (negative) sci.remove_prefix(1);
    const auto epos = sci.find('e');
    std::string digits;
    for (char c : sci.substr(0, epos)) {
        if (c != '.') digits.push_back(c);
    }
    int exp10 = 0;
    std::from_chars(sci.data() + epos + 1 + (sci[epos + 1] == '+' ? 1 : 0),
                    sci.data() + sci.size(), exp10);

    if (negative) out.push_back('-');
    const int ndigits = static_cast<int>(digits.size());
    if (exp10 >= -4 && exp10 < 16) {
        if (exp10 < 0) {
            out += "0.";
            out.append(static_cast<std::size_t>(-exp10 - 1), '0');
            out += digits;
        } else if (ndigits <= exp10 + 1) {
            out += digits;
            out.append(static_cast<std::size_t>(exp10 + 1 - ndigits), '0');
            out += ".0";
        } else {
            out.append(digits, 0, static_cast<std::size_t>(exp10 + 1));
            out.push_back('.');
            out.append(digits, static_cast<std::size_t>(exp10 + 1));
        }
    } else {
        out.push_back(digits[0]);
        if (ndigits > 1) {
            out.push_back('.');
            out.append(digits, 1);
        }
        out.push_back('e');
        out.push_back(exp10 < 0 ? '-' : '+');
        const int mag = exp10 < 0 ? -exp10 : exp10;
        if (mag < 10) out.push_back('0');
        append_integer(mag, out);
    }
    return out;
}

void encode_value(const Value& value, std::string& out) {
    using T = Value::value_t;
    switch (value.type()) {
        case T::null: out += "null"; break;
        case T::boolean: out += value.get<bool>() ? "true" : "false"; break;
        case T::number_integer: append_integer(value.get<std::int64_t>(), out); break;
        case T::number_unsigned: append_integer(value.get<std::uint64_t>(), out); break;
        case T::number_float: out += format_number(value.get<double>()); break;
        case T::string: encode_string(value.get_ref<const std::string&>(), out); break;
        case T::array: {
            out.push_back('[');
            bool first = true;
            for (const auto& item : value) {
                if (!first) out.push_back(',');
                first = false;
                encode_value(item, out);
            }
            out.push_back(']');
            break;
        }
        case T::object: {
            // nlohmann::json objects are std::map-backed: iteration is already byte-sorted.
            out.push_back('{');
            bool first = true;
            for (const auto& [key, item] : value.items()) {
                if (!first) out.push_back(',');
                first = false;
                encode_string(key, out);
                out.push_back(':');
                encode_value(item, out);
            }
            out.push_back('}');
            break;
        }
        case T::binary:
        case T::discarded: throw EncodeError("unsupported value type");
    }
}

std::string encode_value(const Value& value) {
    std::string out;
    encode_value(value, out);
    return out;
}

Value decode_value(std::string_view text) {
    try {
        return Value::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DecodeError("", std::string("malformed record: ") + e.what());
    }
}

namespace {

bool needs_topic(Kind k) { return k == Kind::Pub || k == Kind::Deliver; }

const std::set<std::string, std::less<>> kEnvelopeKeys{
    "dest", "error_code", "federate", "kind", "payload",
    "protocol_version", "seq", "tick", "token", "topic"};

}  // namespace

std::string canonical_encode(const Envelope& e) {
    if (needs_topic(e.kind)) {
        if (e.topic.empty()) throw EncodeError("PUB/DELIVER envelope without topic");
        if (e.payload.is_null()) throw EncodeError("PUB/DELIVER envelope without payload");
    }
    if (e.kind == Kind::Deliver && e.dest.empty()) throw EncodeError("DELIVER without dest");

    Value obj = Value::object();
    obj["kind"] = std::string(to_string(e.kind));
    obj["protocol_version"] = e.protocol_version;
    obj["federate"] = e.federate;
    obj["tick"] = e.tick;
    if (needs_topic(e.kind) || !e.topic.empty()) obj["topic"] = e.topic;
    if (needs_topic(e.kind) || e.seq != 0) obj["seq"] = e.seq;
    if (needs_topic(e.kind) || !e.payload.is_null()) obj["payload"] = e.payload;
    if (e.kind == Kind::Hello || !e.token.empty()) obj["token"] = e.token;
    if (e.kind == Kind::Error || !e.error_code.empty()) obj["error_code"] = e.error_code;
    if (e.kind == Kind::Deliver || !e.dest.empty()) obj["dest"] = e.dest;

    std::string out;
    encode_value(obj, out);
    out.push_back('\n');
    return out;
}

namespace {

const Value& require(const Value& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw DecodeError(key, std::string("missing required field '") + key + "'");
    return *it;
}

std::string get_string(const Value& v, const char* key) {
    if (!v.is_string()) throw DecodeError(key, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t get_unsigned(const Value& v, const char* key) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw DecodeError(key, std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

}  // namespace

Envelope canonical_decode(std::string_view bytes) {
    if (!bytes.empty() && bytes.back() == '\n') bytes.remove_suffix(1);
    const Value obj = decode_value(bytes);
    if (!obj.is_object()) throw DecodeError("", "record is not an object");
    for (const auto& [key, _] : obj.items()) {
        if (!kEnvelopeKeys.contains(key)) throw DecodeError(key, "unknown key '" + key + "'");
    }

    Envelope e;
    const auto kind = kind_from_string(get_string(require(obj, "kind"), "kind"));
    if (!kind) throw DecodeError("kind", "unknown kind");
    e.kind = *kind;

    const Value& version = require(obj, "protocol_version");
    if (!version.is_number_integer()) throw DecodeError("protocol_version", "protocol_version must be an integer");
    e.protocol_version = version.get<int>();
    e.federate = get_string(require(obj, "federate"), "federate");
    e.tick = get_unsigned(require(obj, "tick"), "tick");

    const bool routed = needs_topic(e.kind);
    auto optional = [&](const char* key, bool required) -> const Value* {
        if (required) return &require(obj, key);
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    };
    if (const Value* v = optional("topic", routed)) e.topic = get_string(*v, "topic");
    if (const Value* v = optional("seq", routed)) e.seq = get_unsigned(*v, "seq");
    if (const Value* v = optional("payload", routed)) e.payload = *v;
    if (const Value* v = optional("token", e.kind == Kind::Hello)) e.token = get_string(*v, "token");
    if (const Value* v = optional("error_code", e.kind == Kind::Error)) e.error_code = get_string(*v, "error_code");
    if (const Value* v = optional("dest", e.kind == Kind::Deliver)) e.dest = get_string(*v, "dest");

    if (routed && e.topic.empty()) throw DecodeError("topic", "PUB/DELIVER requires a non-empty topic");
    if (routed && e.payload.is_null()) throw DecodeError("payload", "PUB/DELIVER requires a payload");
    if (e.kind == Kind::Deliver && e.dest.empty()) throw DecodeError("dest", "DELIVER requires a destination");
    return e;
}

}  // namespace blueice
