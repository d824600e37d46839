#pragma once

// Discrete Brownian motion on an equispaced grid: covariance and the
// standard (Cholesky) and PCA generation matrices.

#include <algorithm>
#include <cmath>
#include <span>

#include "qmcvr/errors.hpp"
#include "qmcvr/linalg.hpp"

namespace qmcvr {

struct TimeGrid {
    int d = 1;
    double maturity = 1.0;

    TimeGrid() = default;
    TimeGrid(int steps, double t) : d(steps), maturity(t)
    {
        if (steps < 1) {
            throw DomainError("TimeGrid: need at least one observation time");
        }
        if (!(t > 0.0)) {
            throw DomainError("TimeGrid: maturity must be positive");
        }
    }

    double dt() const { return maturity / d; }
    double time(int j) const { return j * dt(); } ///< 1-based observation index
};

enum class Construction { Standard, Pca };

/// Generation matrix R with R R^T equal to the grid covariance.
struct PathGenerator {
    Matrix r;
    Construction construction = Construction::Standard;
    TimeGrid grid;

    int dim() const { return grid.d; }

    /// out = R z. The standard construction is a scaled running sum.
    void apply(std::span<const double> z, std::span<double> out) const
    {
        const int d = grid.d;
        if (construction == Construction::Standard) {
            const double scale = std::sqrt(grid.dt());
            double acc = 0.0;
            for (int j = 0; j < d; ++j) {
                acc += z[j];
                out[j] = scale * acc;
            }
            return;
        }
        Eigen::Map<const Vector> zv(z.data(), d);
        Eigen::Map<Vector>(out.data(), d) = r * zv;
    }
};

/// Sigma(i,j) = dt * min(i+1, j+1).
inline SymMatrix covariance(const TimeGrid& grid)
{
    const int d = grid.d;
    Matrix sigma(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            sigma(i, j) = grid.dt() * (std::min(i, j) + 1);
        }
    }
    return SymMatrix(sigma);
}

inline PathGenerator gen_std(const TimeGrid& grid)
{
    const int d = grid.d;
    Matrix r = Matrix::Zero(d, d);
    const double scale = std::sqrt(grid.dt());
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            r(i, j) = scale;
        }
    }
    return {std::move(r), Construction::Standard, grid};
}

/// R = P D^{1/2} from the descending eigendecomposition of Sigma. Each
/// eigenvector is signed so its largest-magnitude entry is positive.
inline PathGenerator gen_pca(const TimeGrid& grid)
{
    auto eig = sym_eigen(covariance(grid));
    const int d = grid.d;
    Matrix r(d, d);
    for (int k = 0; k < d; ++k) {
        Eigen::Index arg = 0;
        eig.q.col(k).cwiseAbs().maxCoeff(&arg);
        const double sign = eig.q(arg, k) < 0.0 ? -1.0 : 1.0;
        r.col(k) = sign * std::sqrt(std::max(eig.lambda(k), 0.0)) * eig.q.col(k);
    }
    return {std::move(r), Construction::Pca, grid};
}

} // namespace qmcvr
