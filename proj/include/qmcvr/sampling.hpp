#pragma once

// Gaussian point streams: randomly shifted Sobol points or pseudo-random
// uniforms, mapped through the normal quantile.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "qmcvr/normal.hpp"
#include "qmcvr/randomize.hpp"
#include "qmcvr/sobol.hpp"

namespace qmcvr {

/// big_phi_inv with u = 0 (a shifted point landing exactly on the origin)
/// nudged to half the 53-bit grid step.
inline double to_gaussian(double u)
{
    return big_phi_inv(u > 0.0 ? u : 0x1.0p-54);
}

enum class Randomization {
    Shift,    ///< Cranley-Patterson shift modulo 1
    Scramble, ///< random linear matrix scramble plus digital shift
};

/// Randomized Sobol points mapped to N(0, I), one point per call.
class GaussianRqmcStream {
public:
    GaussianRqmcStream(std::size_t dim, RandomizationSeed key, Stream stream = Stream::Shift,
                       Randomization kind = Randomization::Shift)
        : sobol_(dim), shift_(dim, 0.0), buffer_(dim)
    {
        if (kind == Randomization::Scramble) {
            auto engine = make_engine(key, stream);
            sobol_.scramble(engine);
        } else {
            shift_ = random_shift(dim, key, stream);
        }
    }

    std::size_t dim() const { return buffer_.size(); }

    void next(std::span<double> z)
    {
        sobol_.next(buffer_);
        for (std::size_t j = 0; j < buffer_.size(); ++j) {
            z[j] = to_gaussian(shift_mod1(buffer_[j], shift_[j]));
        }
    }

private:
    SobolSequence sobol_;
    std::vector<double> shift_;
    std::vector<double> buffer_;
};

/// Pseudo-random N(0, I) points from open uniforms.
class GaussianMcStream {
public:
    GaussianMcStream(std::size_t dim, RandomizationSeed key, Stream stream = Stream::MonteCarlo)
        : dim_(dim), engine_(make_engine(key, stream))
    {
    }

    std::size_t dim() const { return dim_; }

    void next(std::span<double> z)
    {
        for (std::size_t j = 0; j < dim_; ++j) {
            z[j] = big_phi_inv(uniform_open01(engine_));
        }
    }

private:
    std::size_t dim_;
    std::mt19937_64 engine_;
};

/// The first count points of a Gaussian RQMC stream, stored row-major.
inline PointSet gaussian_rqmc_points(std::size_t dim, std::size_t count, RandomizationSeed key,
                                     Stream stream = Stream::GradientShift,
                                     Randomization kind = Randomization::Shift)
{
    PointSet ps{dim, count, std::vector<double>(dim * count)};
    GaussianRqmcStream gen(dim, key, stream, kind);
    for (std::size_t i = 0; i < count; ++i) {
        gen.next({ps.values.data() + i * dim, dim});
    }
    return ps;
}

} // namespace qmcvr
