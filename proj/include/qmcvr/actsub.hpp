#pragma once

// Gradient information matrices, active subspaces and rotated integrands.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qmcvr/errors.hpp"
#include "qmcvr/finite_diff.hpp"
#include "qmcvr/integrand.hpp"
#include "qmcvr/linalg.hpp"
#include "qmcvr/sobol.hpp"

namespace qmcvr {

struct GradientInfoMatrix {
    SymMatrix c;
    int m_samples = 0;
    double scale = 0.0; ///< max |c(i,j)|
};

struct ActiveSubspace {
    Matrix q;
    Vector lambda;
};

/// (g(z + eps e_i) - g(z)) / eps.
inline Vector grad_fd(const Integrand& g, std::span<const double> z, double eps)
{
    Vector grad(static_cast<Eigen::Index>(z.size()));
    forward_gradient(g, z, eps, {grad.data(), z.size()});
    return grad;
}

/// (1/M) sum_i grad(z_i) grad(z_i)^T over the rows of a Gaussian point set.
/// Gradients are collected first and reduced in a fixed order.
inline GradientInfoMatrix estimate_c(const GradientFn& grad, const PointSet& points)
{
    const auto d = static_cast<Eigen::Index>(points.dim);
    const auto m = static_cast<Eigen::Index>(points.n);
    if (m == 0) {
        throw DomainError("estimate_c: need at least one sample");
    }
    Matrix g(m, d);
    std::vector<double> row(points.dim);
    for (Eigen::Index i = 0; i < m; ++i) {
        grad(points.row(static_cast<std::size_t>(i)), row);
        for (Eigen::Index j = 0; j < d; ++j) {
            g(i, j) = row[static_cast<std::size_t>(j)];
        }
    }
    SymMatrix c(Matrix(g.transpose() * g) / static_cast<double>(m));
    const double scale = c.max_abs();
    return {std::move(c), static_cast<int>(m), scale};
}

/// Same, with forward-difference gradients of step rel * (1 + |z_i|).
inline GradientInfoMatrix estimate_c(const Integrand& g, const PointSet& points,
                                     double rel = kForwardStep)
{
    return estimate_c(
        [&g, rel](std::span<const double> z, std::span<double> out) {
            forward_gradient_scaled(g, z, rel, out);
        },
        points);
}

enum class SignRule {
    /// Column 0 signed so r_ref q_0 sums to a nonnegative value, then
    /// required to be elementwise nonnegative.
    Separable,
    /// Deterministic signs only.
    Free,
};

/// Eigendecomposition of C with a deterministic column-sign convention
/// measured through r_ref: column k >= 1 (and column 0 under SignRule::Free)
/// is flipped so that the largest-magnitude entry of r_ref q_k is positive.
///
/// Throws MethodFailed if the leading eigenvalue is at most
/// 1e-12 (1 + scale), and SeparabilityViolation if r_ref q_0 has an entry
/// below -1e-10 under SignRule::Separable.
inline ActiveSubspace active_subspace(const GradientInfoMatrix& c, const Matrix& r_ref,
                                      SignRule rule = SignRule::Separable)
{
    const auto d = c.c.dim();
    if (r_ref.cols() != d) {
        throw DomainError("active_subspace: reference matrix has the wrong number of columns");
    }
    auto eig = sym_eigen(c.c);
    if (d == 0 || !(eig.lambda(0) > 1e-12 * (1.0 + c.scale))) {
        throw MethodFailed("zero gradient information matrix");
    }
    for (Eigen::Index k = 0; k < d; ++k) {
        if (eig.lambda(k) < 0.0) {
            eig.lambda(k) = 0.0;
        }
    }

    for (Eigen::Index k = 0; k < d; ++k) {
        const Vector image = r_ref * eig.q.col(k);
        if (k == 0 && rule == SignRule::Separable) {
            if (image.sum() < 0.0) {
                eig.q.col(0) *= -1.0;
            }
            const double worst = (r_ref * eig.q.col(0)).minCoeff();
            if (worst < -1e-10) {
                throw SeparabilityViolation("leading active direction has mixed signs (min entry " +
                                            std::to_string(worst) + ")");
            }
            continue;
        }
        Eigen::Index arg = 0;
        image.cwiseAbs().maxCoeff(&arg);
        if (image(arg) < 0.0) {
            eig.q.col(k) *= -1.0;
        }
    }
    return {std::move(eig.q), std::move(eig.lambda)};
}

/// Smallest gap between consecutive eigenvalues, relative to the largest.
inline double relative_eigengap(const Vector& lambda)
{
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 1; k < lambda.size(); ++k) {
        gap = std::min(gap, lambda(k - 1) - lambda(k));
    }
    return lambda.size() == 0 ? gap : gap / lambda(0);
}

/// z -> g(Q z).
inline Integrand rotate_integrand(Integrand g, Matrix q)
{
    return [g = std::move(g), q = std::move(q)](std::span<const double> z) {
        const auto n = static_cast<Eigen::Index>(z.size());
        std::vector<double> x(z.size());
        Eigen::Map<Vector>(x.data(), n) = q * Eigen::Map<const Vector>(z.data(), n);
        return g(x);
    };
}

inline Integrand rotate_integrand(Integrand g, const ActiveSubspace& as)
{
    return rotate_integrand(std::move(g), as.q);
}

} // namespace qmcvr
