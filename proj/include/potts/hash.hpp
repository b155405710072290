#pragma once

#include <cstdint>
#include <string>

namespace potts {

// FNV-1a content hash, printed as 16 hex digits.
inline uint64_t fnv1a(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string content_hash(const std::string& data) {
    static const char* hex = "0123456789abcdef";
    uint64_t h = fnv1a(data);
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = hex[h & 0xf];
        h >>= 4;
    }
    return s;
}

}  // namespace potts
