#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace biokg {

// Bad configuration, bad CLI input, malformed schema/weight files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// FNV-1a, used for stable content addressing (node ids, cache keys,
// manifest digests). Not cryptographic.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

inline std::string content_digest(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace biokg
