#pragma once

// Finite-difference derivatives of integrands and of their logarithms.

#include <cmath>
#include <span>
#include <vector>

#include "qmcvr/errors.hpp"
#include "qmcvr/integrand.hpp"
#include "qmcvr/linalg.hpp"

namespace qmcvr {

/// Relative forward step used for gradient information matrices.
inline constexpr double kForwardStep = 1e-6;

/// Forward difference (g(z + eps e_i) - g(z)) / eps with one scalar step.
inline void forward_gradient(const Integrand& g, std::span<const double> z, double eps,
                             std::span<double> grad)
{
    std::vector<double> x(z.begin(), z.end());
    const double g0 = g(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = z[i] + eps;
        grad[i] = (g(x) - g0) / eps;
        x[i] = z[i];
    }
}

/// Forward difference with the coordinate-scaled step rel * (1 + |z_i|).
inline void forward_gradient_scaled(const Integrand& g, std::span<const double> z, double rel,
                                    std::span<double> grad)
{
    std::vector<double> x(z.begin(), z.end());
    const double g0 = g(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = rel * (1.0 + std::abs(z[i]));
        x[i] = z[i] + h;
        // Use the step actually represented in floating point.
        const double step = x[i] - z[i];
        grad[i] = (g(x) - g0) / step;
        x[i] = z[i];
    }
}

namespace detail {

inline double checked_log(const Integrand& g, std::span<const double> x)
{
    const double v = g(x);
    if (!(v > 0.0)) {
        throw DomainExit("log of integrand: integrand is not positive at the evaluation point");
    }
    return std::log(v);
}

} // namespace detail

/// Central-difference gradient of ln g, step rel * (1 + |z_i|).
inline Vector log_gradient_central(const Integrand& g, std::span<const double> z,
                                   double rel = 1e-5)
{
    const auto n = static_cast<Eigen::Index>(z.size());
    Vector grad(n);
    std::vector<double> x(z.begin(), z.end());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = rel * (1.0 + std::abs(z[i]));
        x[i] = z[i] + h;
        const double up = detail::checked_log(g, x);
        const double hp = x[i] - z[i];
        x[i] = z[i] - h;
        const double down = detail::checked_log(g, x);
        const double hm = z[i] - x[i];
        x[i] = z[i];
        grad(i) = (up - down) / (hp + hm);
    }
    return grad;
}

/// Fourth-order (five-point) central gradient of ln g.
inline Vector log_gradient_fourth_order(const Integrand& g, std::span<const double> z,
                                        double rel = 1e-3)
{
    const auto n = static_cast<Eigen::Index>(z.size());
    Vector grad(n);
    std::vector<double> x(z.begin(), z.end());
    const auto at = [&](Eigen::Index i, double offset) {
        x[i] = z[i] + offset;
        const double v = detail::checked_log(g, x);
        x[i] = z[i];
        return v;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = rel * (1.0 + std::abs(z[i]));
        grad(i) = (-at(i, 2 * h) + 8.0 * at(i, h) - 8.0 * at(i, -h) + at(i, -2 * h)) / (12.0 * h);
    }
    return grad;
}

/// Symmetrized central-difference Hessian of ln g with a fixed step.
inline SymMatrix log_hessian_central(const Integrand& g, std::span<const double> z,
                                     double h = 1e-4)
{
    const auto n = static_cast<Eigen::Index>(z.size());
    Matrix hess(n, n);
    std::vector<double> x(z.begin(), z.end());
    const double f0 = detail::checked_log(g, x);
    const auto at = [&](Eigen::Index i, double di, Eigen::Index j, double dj) {
        x[i] += di;
        x[j] += dj;
        const double v = detail::checked_log(g, x);
        x[i] = z[i];
        x[j] = z[j];
        return v;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        hess(i, i) = (at(i, h, i, 0.0) - 2.0 * f0 + at(i, -h, i, 0.0)) / (h * h);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) +
                              at(i, -h, j, -h)) /
                             (4.0 * h * h);
            hess(i, j) = v;
            hess(j, i) = v;
        }
    }
    return SymMatrix(hess);
}

} // namespace qmcvr
