#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qmcvr/detail/joe_kuo.hpp"
#include "qmcvr/errors.hpp"

namespace qmcvr {

inline constexpr std::size_t kMaxSobolDimension = 64;

/// n points in [0,1)^dim stored row-major.
struct PointSet {
    std::size_t dim = 0;
    std::size_t n = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t j) const { return values[i * dim + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * dim + j]; }

    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// Gray-code Sobol generator with 32-bit direction numbers.
///
/// Point 0 is the origin; point i+1 is point i with the direction number of
/// the lowest zero bit of i xor-ed in (Antonov-Saleev ordering).
class SobolSequence {
public:
    static constexpr int kBits = 32;

    explicit SobolSequence(std::size_t dim) : dim_(dim), state_(dim, 0u), directions_(dim * kBits)
    {
        if (dim == 0 || dim > kMaxSobolDimension) {
            throw UnsupportedDimension("sobol: dimension " + std::to_string(dim) +
                                       " outside [1, 64]");
        }
        for (int k = 0; k < kBits; ++k) {
            directions_[k] = 1u << (kBits - 1 - k);
        }
        for (std::size_t j = 1; j < dim; ++j) {
            const auto& row = detail::kJoeKuoRows[j - 1];
            const std::uint32_t s = row.degree;
            std::uint32_t* v = directions_.data() + j * kBits;
            for (std::uint32_t k = 0; k < s && k < kBits; ++k) {
                v[k] = row.m[k] << (kBits - 1 - k);
            }
            for (std::uint32_t k = s; k < kBits; ++k) {
                std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
                for (std::uint32_t i = 1; i < s; ++i) {
                    value ^= ((row.coeffs >> (s - 1 - i)) & 1u) * v[k - i];
                }
                v[k] = value;
            }
        }
    }

    std::size_t dim() const { return dim_; }
    std::uint64_t index() const { return index_; }

    /// Random linear matrix scramble plus random digital shift. Each
    /// coordinate's direction numbers are multiplied by a random unit lower
    /// triangular binary matrix (digits ordered most significant first) and
    /// the starting state is a random 32-bit word. Points are then reported
    /// at the centre of their 2^-32 cell, so 0 is never produced. Must be
    /// called before the first point is drawn.
    template <class Engine>
    void scramble(Engine& engine)
    {
        if (index_ != 0) {
            throw DomainError("sobol: scramble after points were drawn");
        }
        std::array<std::uint32_t, kBits> rows{};
        for (std::size_t j = 0; j < dim_; ++j) {
            // rows[i] selects the input digits feeding output digit i; digit
            // i lives in bit kBits-1-i.
            for (int i = 0; i < kBits; ++i) {
                const auto random_bits = static_cast<std::uint32_t>(engine() >> 32);
                const std::uint32_t above = i == 0 ? 0u : ~0u << (kBits - i);
                rows[i] = (random_bits & above) | (1u << (kBits - 1 - i));
            }
            std::uint32_t* v = directions_.data() + j * kBits;
            for (int k = 0; k < kBits; ++k) {
                std::uint32_t mixed = 0;
                for (int i = 0; i < kBits; ++i) {
                    mixed |= static_cast<std::uint32_t>(std::popcount(rows[i] & v[k]) & 1)
                             << (kBits - 1 - i);
                }
                v[k] = mixed;
            }
            state_[j] = static_cast<std::uint32_t>(engine() >> 32);
        }
        offset_ = 0.5;
    }

    /// Writes the current point into out and advances.
    void next(std::span<double> out)
    {
        constexpr double kScale = 1.0 / 4294967296.0;
        if (exhausted_) {
            throw UnsupportedDimension("sobol: more than 2^32 points requested");
        }
        for (std::size_t j = 0; j < dim_; ++j) {
            out[j] = (static_cast<double>(state_[j]) + offset_) * kScale;
        }
        const int c = std::countr_one(index_);
        ++index_;
        if (c >= kBits) {
            exhausted_ = true;
            return;
        }
        for (std::size_t j = 0; j < dim_; ++j) {
            state_[j] ^= directions_[j * kBits + c];
        }
    }

private:
    std::size_t dim_;
    std::uint64_t index_ = 0;
    bool exhausted_ = false;
    double offset_ = 0.0;
    std::vector<std::uint32_t> state_;
    std::vector<std::uint32_t> directions_;
};

/// First n points of the unrandomized sequence. n must be a power of two.
inline PointSet sobol_points(std::size_t dim, std::size_t n)
{
    if (n == 0 || !std::has_single_bit(n) || n > (std::size_t{1} << 32)) {
        throw DomainError("sobol_points: n must be a power of two not exceeding 2^32");
    }
    SobolSequence seq(dim);
    PointSet ps{dim, n, std::vector<double>(dim * n)};
    for (std::size_t i = 0; i < n; ++i) {
        seq.next({ps.values.data() + i * dim, dim});
    }
    return ps;
}

} // namespace qmcvr
