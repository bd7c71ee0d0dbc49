#pragma once

// Seeded, splittable PRNG. Identical (seed, stream_id) pairs reproduce
// identical draw sequences; distinct stream_ids give independent streams,
// which is what makes the simulation studies reproducible under any
// parallel schedule.

#include <cstdint>

namespace bdm {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // Uniform on (0,1), 53-bit resolution, never exactly 0 or 1.
    double uniform01();

    // Standard normal (Marsaglia polar; one spare cached).
    double normal();

    double exponential(double mean);

    // Gamma(shape, rate) via Marsaglia-Tsang, shape boost for shape < 1.
    double gamma(double shape, double rate);

private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bdm
