#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace splat {

// 64-bit FNV-1a. Stable across platforms; used for method digests,
// model digests, and trie-file checksums.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string digest_hex(std::string_view data) {
    return to_hex(fnv1a(data));
}

}  // namespace splat
