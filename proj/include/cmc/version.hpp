#pragma once

#include <cstdint>
#include <string>

namespace cmc {

inline constexpr const char* library_version = "1.0.0";

// FNV-1a over a canonical config string; used for the provenance header of
// every file this library writes, so outputs can be traced to the exact
// configuration that produced them.
inline std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= static_cast<std::uint64_t>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace cmc
