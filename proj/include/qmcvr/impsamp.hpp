#pragma once

// Optimal-drift and Laplace importance sampling for Gaussian integrands.
//
// With F = ln g, the optimal drift solves grad F(mu) = mu and the shifted
// integrand g(z + mu) exp(-mu^T z - mu^T mu / 2) has the same mean as g
// under N(0, I). Laplace IS additionally rescales by
// Gamma = (I - hess F(mu))^{-1}.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "qmcvr/errors.hpp"
#include "qmcvr/finite_diff.hpp"
#include "qmcvr/integrand.hpp"
#include "qmcvr/linalg.hpp"
#include "qmcvr/model.hpp"

namespace qmcvr {

struct DriftResult {
    Vector mu;
    double y_star = 0.0;   ///< Asian solver: mean(S) - K at the drift; generic: g(mu)
    double residual = 0.0; ///< max |grad F(mu) - mu|
    int iterations = 0;
};

struct LaplaceParams {
    Vector mu;
    SymMatrix gamma_star;
    Matrix l_star;
};

namespace detail {

struct AsianDriftPath {
    double excess; ///< mean(S(y)) - K - y, +inf on overflow
    Vector z;
};

// Builds z from the recurrences for a trial y = mean(S) - K and returns the
// mismatch of the scalar equation mean(S(y)) - K = y.
inline AsianDriftPath asian_drift_path(const MarketParams& p, double y)
{
    const int d = p.d();
    const double sdt = p.sigma * std::sqrt(p.grid.dt());
    AsianDriftPath out{0.0, Vector(d)};
    double zi = sdt * (y + p.k) / y;
    double cumulative = 0.0;
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
        out.z(i) = zi;
        cumulative += zi;
        const double s = p.s0 * std::exp(p.log_drift(i + 1) + sdt * cumulative);
        if (!std::isfinite(s)) {
            out.excess = std::numeric_limits<double>::infinity();
            return out;
        }
        sum += s;
        zi -= sdt * s / (y * d);
    }
    out.excess = sum / d - p.k - y;
    if (std::isnan(out.excess)) {
        out.excess = std::numeric_limits<double>::infinity();
    }
    return out;
}

} // namespace detail

/// Optimal drift of the Asian call payoff under the standard construction,
/// via the scalar equation mean(S(y)) - K = y.
///
/// Bisection on [1e-10, 10 s0 e^{|r|T}] down to width 1e-12 s0, followed by
/// two guarded Newton polish steps. The residual of grad ln g(mu) = mu is
/// checked with a fourth-order central difference.
inline DriftResult solve_optimal_drift_asian(const MarketParams& p)
{
    p.validate();
    double lo = 1e-10;
    double hi = 10.0 * p.s0 * std::exp(std::abs(p.r) * p.grid.maturity);
    const auto excess = [&p](double y) { return detail::asian_drift_path(p, y).excess; };

    if (!(excess(lo) > 0.0) || !(excess(hi) < 0.0)) {
        throw DriftFailure("solve_optimal_drift_asian: no sign change of the drift equation in "
                           "[1e-10, 10 s0 e^{|r|T}]");
    }
    const double width = 1e-12 * p.s0;
    int iterations = 0;
    while (hi - lo > width && iterations < 200) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++iterations;
    }
    double y = 0.5 * (lo + hi);
    double hy = excess(y);
    for (int polish = 0; polish < 2; ++polish) {
        const double delta = 1e-7 * y;
        const double slope = (excess(y + delta) - excess(y - delta)) / (2.0 * delta);
        if (!(slope != 0.0) || !std::isfinite(slope)) {
            break;
        }
        const double candidate = y - hy / slope;
        if (!(candidate > 0.0)) {
            break;
        }
        const double hc = excess(candidate);
        if (std::abs(hc) < std::abs(hy)) {
            y = candidate;
            hy = hc;
        }
    }

    DriftResult result;
    result.mu = detail::asian_drift_path(p, y).z;
    result.y_star = y;
    result.iterations = iterations;

    const Integrand payoff = payoff_integrand(p, gen_std(p.grid));
    const Vector grad = log_gradient_fourth_order(
        payoff, std::span<const double>(result.mu.data(), static_cast<std::size_t>(p.d())));
    result.residual = (grad - result.mu).cwiseAbs().maxCoeff();
    if (result.residual > 1e-6) {
        throw DriftInconsistency("solve_optimal_drift_asian: fixed-point residual " +
                                 std::to_string(result.residual) + " exceeds 1e-6");
    }
    return result;
}

struct DriftOptions {
    double tolerance = 1e-8;
    int max_iterations = 200;
};

namespace detail {

inline std::span<const double> as_span(const Vector& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

inline bool positive_at(const Integrand& g, const Vector& z) { return g(as_span(z)) > 0.0; }

// grad ln g(z) - z; throws DomainExit if g is not positive on the stencil.
inline Vector drift_mismatch(const Integrand& g, const Vector& z)
{
    return log_gradient_central(g, as_span(z)) - z;
}

inline DriftResult newton_drift(const Integrand& g, Vector z, const DriftOptions& opt)
{
    Vector h = drift_mismatch(g, z);
    double norm = h.cwiseAbs().maxCoeff();
    // Once within tolerance, one more Newton step is taken before returning.
    bool polishing = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (norm <= opt.tolerance) {
            if (polishing) {
                return {z, g(as_span(z)), norm, it};
            }
            polishing = true;
        }
        const Matrix jac =
            log_hessian_central(g, as_span(z)).matrix() - Matrix::Identity(z.size(), z.size());
        const Vector step = jac.fullPivLu().solve(-h);

        bool accepted = false;
        if (step.allFinite()) {
            double t = 1.0;
            for (int halving = 0; halving <= 10; ++halving, t *= 0.5) {
                const Vector trial = z + t * step;
                try {
                    const Vector ht = drift_mismatch(g, trial);
                    const double nt = ht.cwiseAbs().maxCoeff();
                    if (nt < norm) {
                        z = trial;
                        h = ht;
                        norm = nt;
                        accepted = true;
                        break;
                    }
                } catch (const DomainExit&) {
                    // shrink the step
                }
            }
        }
        if (!accepted) {
            if (norm <= opt.tolerance) {
                return {z, g(as_span(z)), norm, it};
            }
            // Damped fixed-point step z <- z + (grad F(z) - z) / 2.
            const Vector trial = z + 0.5 * h;
            if (!positive_at(g, trial)) {
                throw DomainExit("solve_drift_generic: fixed-point step left the positive region");
            }
            z = trial;
            h = drift_mismatch(g, z);
            norm = h.cwiseAbs().maxCoeff();
        }
    }
    throw DriftFailure("solve_drift_generic: no convergence after " +
                       std::to_string(opt.max_iterations) + " iterations");
}

} // namespace detail

/// Solves grad ln g(z) = z by damped Newton with finite-difference
/// derivatives, falling back to a half-step fixed-point update when the line
/// search cannot reduce the mismatch. Restarts once from a perturbed point if
/// g is not positive at init.
inline DriftResult solve_drift_generic(const Integrand& g, const Vector& init,
                                       const DriftOptions& opt = {})
{
    Vector start = init;
    if (!detail::positive_at(g, start)) {
        start = init + Vector::Constant(init.size(), 0.25);
        if (!detail::positive_at(g, start)) {
            throw DomainExit("solve_drift_generic: integrand is not positive at the start point");
        }
    }
    try {
        return detail::newton_drift(g, start, opt);
    } catch (const DomainExit&) {
        const Vector perturbed = start + Vector::Constant(start.size(), 0.25);
        if (!detail::positive_at(g, perturbed)) {
            throw;
        }
        return detail::newton_drift(g, perturbed, opt);
    }
}

/// z -> g(z + mu) exp(-mu^T z - mu^T mu / 2).
inline Integrand shift_integrand(Integrand g, Vector mu)
{
    const double half_norm = 0.5 * mu.squaredNorm();
    return [g = std::move(g), mu = std::move(mu), half_norm](std::span<const double> z) {
        const auto n = static_cast<Eigen::Index>(z.size());
        Eigen::Map<const Vector> zv(z.data(), n);
        std::vector<double> x(z.size());
        Eigen::Map<Vector>(x.data(), n) = zv + mu;
        const double value = g(x);
        if (value == 0.0) {
            return 0.0;
        }
        return value * std::exp(-mu.dot(zv) - half_norm);
    };
}

struct LaplaceOptions {
    double hessian_step = 1e-4;
    /// Raise SeparabilityViolation when L* has a negative entry.
    bool require_nonnegative_factor = true;
};

/// Gamma* = (I - hess ln g(mu))^{-1} and its Cholesky factor L*.
inline LaplaceParams laplace_params(const Integrand& g, const Vector& mu,
                                    const LaplaceOptions& opt = {})
{
    const auto n = mu.size();
    const SymMatrix hess = log_hessian_central(g, detail::as_span(mu), opt.hessian_step);
    const Matrix precision = Matrix::Identity(n, n) - hess.matrix();
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) {
        throw LaplaceDegenerate("laplace_params: I - hess F(mu) is not positive definite");
    }
    SymMatrix gamma(llt.solve(Matrix::Identity(n, n)));
    Matrix l;
    try {
        l = cholesky(gamma);
    } catch (const NotPositiveDefinite&) {
        throw LaplaceDegenerate("laplace_params: Gamma* is not positive definite");
    }
    if (opt.require_nonnegative_factor && n > 0 && l.minCoeff() < -1e-10) {
        throw SeparabilityViolation("laplace_params: Cholesky factor of Gamma* has negative "
                                    "entries");
    }
    return {mu, std::move(gamma), std::move(l)};
}

/// z -> g(L z + mu) sqrt(det Gamma) exp(z^T z / 2 - |L z + mu|^2 / 2).
inline Integrand laplace_integrand(Integrand g, const LaplaceParams& lp)
{
    const double sqrt_det = lp.l_star.diagonal().prod();
    return [g = std::move(g), mu = lp.mu, l = lp.l_star, sqrt_det](std::span<const double> z) {
        const auto n = static_cast<Eigen::Index>(z.size());
        Eigen::Map<const Vector> zv(z.data(), n);
        std::vector<double> x(z.size());
        Eigen::Map<Vector> xv(x.data(), n);
        xv = l * zv + mu;
        const double value = g(x);
        if (value == 0.0) {
            return 0.0;
        }
        return value * sqrt_det * std::exp(0.5 * zv.squaredNorm() - 0.5 * xv.squaredNorm());
    };
}

} // namespace qmcvr
