#pragma once

// Cranley-Patterson rotation and the seeding scheme shared by every
// randomized stream in the library.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qmcvr/sobol.hpp"

namespace qmcvr {

struct RandomizationSeed {
    std::uint64_t seed = 0;
    std::uint64_t replication_index = 0;
};

/// Independent streams drawn from the same (seed, replication) pair.
enum class Stream : std::uint32_t {
    Shift = 0,
    GradientShift = 1,
    MonteCarlo = 2,
    GradientMonteCarlo = 3,
};

/// Engine keyed by (seed, replication, stream). Distinct keys give
/// independent engines; the same key always gives the same engine.
inline std::mt19937_64 make_engine(RandomizationSeed key, Stream stream = Stream::Shift)
{
    std::seed_seq seq{static_cast<std::uint32_t>(key.seed),
                      static_cast<std::uint32_t>(key.seed >> 32),
                      static_cast<std::uint32_t>(key.replication_index),
                      static_cast<std::uint32_t>(key.replication_index >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& engine)
{
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1): the 53-bit grid shifted by half a step, never 0 or 1.
inline double uniform_open01(std::mt19937_64& engine)
{
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

inline double shift_mod1(double u, double shift)
{
    double v = u + shift;
    if (v >= 1.0) {
        v -= 1.0;
    }
    return v;
}

inline std::vector<double> random_shift(std::size_t dim, RandomizationSeed key,
                                        Stream stream = Stream::Shift)
{
    auto engine = make_engine(key, stream);
    std::vector<double> shift(dim);
    for (auto& s : shift) {
        s = uniform01(engine);
    }
    return shift;
}

/// Adds shift coordinatewise modulo 1.
inline PointSet shift_points(const PointSet& points, std::span<const double> shift)
{
    PointSet out = points;
    for (std::size_t i = 0; i < out.n; ++i) {
        for (std::size_t j = 0; j < out.dim; ++j) {
            out(i, j) = shift_mod1(points(i, j), shift[j]);
        }
    }
    return out;
}

inline PointSet randomize(const PointSet& points, RandomizationSeed key)
{
    const auto shift = random_shift(points.dim, key);
    return shift_points(points, shift);
}

} // namespace qmcvr
