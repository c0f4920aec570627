#pragma once

#include <cstdint>
#include <random>

namespace mixsep {

/// Reproducible random stream. A stream is identified by (seed, stream index);
/// distinct indices give independent, order-free streams, so replication r of
/// a simulation can be regenerated without touching replications 0..r-1.
///
/// Variates are produced by hand-written transforms of the raw 64-bit engine
/// output rather than <random> distributions, whose algorithms differ between
/// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Child stream, independent of this one and of other children.
    Rng split(std::uint64_t index) const;

    std::uint64_t next() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform();

    /// Standard normal (Marsaglia polar method).
    double normal();

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mixsep
