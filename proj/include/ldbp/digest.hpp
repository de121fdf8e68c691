#pragma once

#include <cstdint>
#include <type_traits>

namespace ldbp {

/// Order-sensitive FNV-1a accumulator for table snapshots.
class StateDigest {
public:
    template <class T>
    requires std::is_integral_v<T> || std::is_enum_v<T>
    StateDigest& add(T v) {
        auto u = static_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h_ ^= (u >> (8 * i)) & 0xFF;
            h_ *= 0x100000001b3ULL;
        }
        return *this;
    }

    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

} // namespace ldbp
