#include "blueice/prng.hpp"

#include <string>

namespace blueice {

std::uint64_t derive_link_seed(std::uint64_t global_seed, std::string_view topic,
                               std::string_view src, std::string_view dst) {
    std::string key;
    key.reserve(topic.size() + src.size() + dst.size() + 2);
    key.append(topic).append("|").append(src).append("|").append(dst);
    return global_seed ^ fnv1a64(key);
}

}  // namespace blueice
