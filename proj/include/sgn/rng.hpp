#pragma once

#include <cstdint>
#include <random>

namespace sgn {

/// Seeded, splittable random stream.
///
/// The engine is std::mt19937_64 initialised through std::seed_seq from the
/// four 32-bit halves of (seed, stream_id), so distinct stream ids give
/// unrelated engine states. Uniforms use the top 53 bits of each draw;
/// normals use the Marsaglia polar method (the spare value is cached), and
/// Poisson counts use multiplicative inversion. None of these depend on
/// the library's <random> distribution classes, so sequences are stable
/// across standard library implementations.
class RngStream {
public:
    RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// A fresh stream sharing this seed with a different id.
    RngStream substream(std::uint64_t offset) const;

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in (0, 1).
    double uniform_open();
    double normal();
    std::uint64_t poisson(double mean);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sgn
