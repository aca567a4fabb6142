#include "blueice/federate.hpp"

namespace blueice {

bool is_fatal_error(const Envelope& error) {
    return error.error_code != "FORBIDDEN" && error.error_code != "NO_TOPIC";
}

}  // namespace blueice
