#pragma once

#include <string>
#include <string_view>

#include "blueice/envelope.hpp"

namespace blueice {

/// Canonical text of a structured value: sorted keys, no whitespace,
/// integers without fraction, other doubles as shortest round-trip decimal
/// (Python-repr layout). Throws EncodeError on NaN/inf.
std::string encode_value(const Value& value);
void encode_value(const Value& value, std::string& out);

/// Parses one canonical document (no trailing line feed). Throws DecodeError.
Value decode_value(std::string_view text);

/// Shortest round-trip rendering of a finite double.
std::string format_number(double v);

/// One LF-terminated canonical record.
std::string canonical_encode(const Envelope& envelope);

/// Inverse of canonical_encode. Accepts the record with or without its LF.
Envelope canonical_decode(std::string_view bytes);

}  // namespace blueice
