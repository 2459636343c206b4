#pragma once

#include <cstdint>
#include <string_view>

namespace multigroup {

// Deterministic counter-based generator with named substreams.
//
// Every random quantity in the project is derived from one 64-bit root seed
// through substream names ("trial/7", "sample", ...), so multi-trial
// experiments are reproducible and independent of evaluation order. The
// stdlib engines are portable but their distributions are not
// implementation-pinned, and <random> has no substream derivation, so the
// few lines of splitmix64 are written out here; outputs are identical on
// every platform.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    // Derives an independent child stream from a label. Does not advance
    // this stream.
    [[nodiscard]] RngStream stream(std::string_view name) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label bytes
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return RngStream(mix(state_ ^ h));
    }

    [[nodiscard]] RngStream stream(std::uint64_t index) const {
        return RngStream(mix(state_ ^ (0x9e3779b97f4a7c15ULL + index)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on {0, ..., n-1}, unbiased via rejection.
    std::uint64_t next_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

}  // namespace multigroup
