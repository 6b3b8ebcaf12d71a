#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace coda {

// FNV-1a, used for config hashes, file fingerprints and seed derivation.
// Stable across platforms and builds.
class Fnv1a {
public:
    void update(const void* data, size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ull;
        }
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::uint64_t digest() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::uint64_t fnv1a(std::string_view s);

// Hashes a file's bytes; throws Error if the file cannot be read.
std::string fingerprint_file(const std::string& path);

// splitmix64 finalizer, for deriving independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace coda
