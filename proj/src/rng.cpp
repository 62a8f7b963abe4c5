#include "sgn/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace sgn {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x5347u};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

RngStream RngStream::substream(std::uint64_t offset) const {
    // Large odd multiplier keeps substreams of nearby ids apart.
    return RngStream(seed_, stream_id_ + 0x9E3779B97F4A7C15ull * (offset + 1));
}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean > 30.0) {
        // Split large means so exp(-mean) stays representable.
        const double half = mean / 2.0;
        return poisson(half) + poisson(mean - half);
    }
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform_open();
    while (prod > limit) {
        ++k;
        prod *= uniform_open();
    }
    return k;
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t r = 0;
    do {
        r = engine_();
    } while (r >= limit);
    return r % n;
}

}  // namespace sgn
