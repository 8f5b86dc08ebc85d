#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace hawkmit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr const char* kVersion = "0.1.0";

/// Campaign tag for an event stream: fake-news process or mitigation process.
enum class EventTag : std::uint8_t { F, M };

inline const char* to_string(EventTag tag) { return tag == EventTag::F ? "F" : "M"; }

// SplitMix64 step; used to derive independent per-task seed streams from a
// master seed without coupling results to scheduling order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    return splitmix64(s);
}

// FNV-1a, used for config/model fingerprints in result rows.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace hawkmit
