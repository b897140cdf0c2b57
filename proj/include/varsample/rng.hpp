#pragma once

#include <complex>
#include <cstdint>

namespace vs {

// Deterministic, platform-independent random stream (splitmix64). Every
// random choice in the pipeline draws from a stream derived from the run
// seed and a purpose tag, so results do not depend on evaluation order or
// worker count.
class SeedStream {
  public:
    SeedStream(std::uint64_t seed, std::uint64_t tag) : state_(mix(seed, tag)) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * unit(); }

    // uniform on the complex unit circle
    std::complex<double> unit_complex() {
        double theta = 6.283185307179586476925286766559 * unit();
        return {std::cos(theta), std::sin(theta)};
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

// Purpose tags for substreams.
namespace rng_tag {
constexpr std::uint64_t gamma_trick = 1;
constexpr std::uint64_t grid_translation = 2;
constexpr std::uint64_t box_center = 3;
constexpr std::uint64_t minor_combos = 4;
constexpr std::uint64_t slice_start = 5;
constexpr std::uint64_t extra_q = 6;
}  // namespace rng_tag

}  // namespace vs
