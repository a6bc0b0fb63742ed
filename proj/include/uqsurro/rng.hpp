#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace uqsurro {

// Seeded random stream with labeled substream derivation.
//
// All randomness in the library flows through explicitly passed RngStream
// objects; there is no hidden global state. A master stream fans out to
// independent substreams via fork("label") / fork("label", index), so
// pipeline stages can be re-run in isolation with identical results.
//
// uniform01/normal_sample are implemented directly on top of the mt19937_64
// bit stream (std::uniform_real_distribution and std::normal_distribution
// are implementation-defined, which would break stored golden values).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

    std::uint64_t seed() const { return seed_; }

    // Derive an independent substream. Deterministic in (seed, label, index)
    // and independent of how much this stream has already been consumed.
    RngStream fork(std::string_view label, std::uint64_t index = 0) const {
        std::uint64_t h = fnv1a(label);
        h ^= mix(index + 0x9e3779b97f4a7c15ULL);
        return RngStream(mix(seed_ ^ h));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on (0, 1]; never returns 0 so log() is safe.
    double uniform01() {
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    // Basic Box-Muller. Consumes exactly two uniforms per call, which keeps
    // substream alignment independent of the values drawn.
    double normal_sample() {
        double u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal_sample(double mean, double stddev) {
        return mean + stddev * normal_sample();
    }

    bool bernoulli(double p) { return uniform01() <= p; }

    // Uniform integer in [0, n). Rejection-free via 128-bit multiply.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static constexpr double two_pi = 6.283185307179586476925286766559;

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace uqsurro
