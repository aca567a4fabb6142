#pragma once

#include <string>

#include "blueice/federate.hpp"
#include "blueice/wire.hpp"

namespace blueice {

struct ClientOptions {
    HostPort address;
    std::string id;
    std::string token;
    std::size_t max_record_bytes = kDefaultMaxRecordBytes;
};

/// Joins a federation and drives `logic` until BYE. Returns the number of ticks
/// completed. Throws ProtocolError (code from the coordinator's ERROR) or
/// ConnectionError.
Tick run_federate(const ClientOptions& options, FederateLogic& logic);

}  // namespace blueice
