#pragma once

// Closed-form integration of the first Gaussian coordinate of the
// (optionally drift-shifted and rotated) Asian payoff.
//
// With A = sigma R Q, beta = mu^T Q and W = A - 1 beta, the shifted and
// rotated payoff is k0 (k1(z) + k2(z)) 1{k3(z) > 0} where
//   k0 = exp(-|mu|^2 / 2),
//   k1 = sum_j exp(base_j + W[j,:] z),   base_j = ln(s0/d) + (r - sigma^2/2) t_j + sigma R[j,:] mu,
//   k2 = -K exp(-beta z),
//   k3 = sum_j exp(base_j + A[j,:] z) - K.
// k3 is nondecreasing in z_1 when A[:,0] >= 0, so {k3 > 0} = {z_1 > gamma}.
// Integrating z_1 uses  int_gamma^inf e^{c z} phi(z) dz = e^{c^2/2} Phi~(gamma - c).

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qmcvr/brownian.hpp"
#include "qmcvr/errors.hpp"
#include "qmcvr/integrand.hpp"
#include "qmcvr/linalg.hpp"
#include "qmcvr/model.hpp"
#include "qmcvr/normal.hpp"

namespace qmcvr {

enum class Target { Price, Delta };

struct SeparableData {
    double k0 = 1.0;
    Vector beta;      ///< mu^T Q
    Matrix a;         ///< sigma R Q
    Matrix w;         ///< sigma R Q - 1 beta
    Vector drift_row; ///< sigma R[j,:] mu
    Vector base;      ///< ln(s0/d) + (r - sigma^2/2) t_j + drift_row_j
    double strike = 0.0;
    double s0 = 0.0;
    double discount = 1.0;
    bool q_first_col_pos = true;

    int d() const { return static_cast<int>(base.size()); }
};

/// Materializes the separable form for generation matrix R, rotation q
/// (identity when empty) and drift mu (zero when empty).
inline SeparableData build_separable(const MarketParams& p, const PathGenerator& gen,
                                     const Matrix& q = {}, const Vector& mu = {})
{
    p.validate();
    const int d = p.d();
    const Matrix rot = q.size() == 0 ? Matrix::Identity(d, d) : q;
    const Vector shift = mu.size() == 0 ? Vector::Zero(d) : mu;
    if (rot.rows() != d || rot.cols() != d || shift.size() != d) {
        throw DomainError("build_separable: rotation or drift has the wrong dimension");
    }

    SeparableData s;
    s.a = p.sigma * gen.r * rot;
    const double worst = s.a.col(0).minCoeff();
    if (worst < -1e-10) {
        throw SeparabilityViolation("build_separable: first column of R Q has a negative entry (" +
                                    std::to_string(worst) + ")");
    }
    s.q_first_col_pos = worst > 0.0;
    s.k0 = std::exp(-0.5 * shift.squaredNorm());
    s.beta = rot.transpose() * shift;
    s.w = s.a - Vector::Ones(d) * s.beta.transpose();
    s.drift_row = p.sigma * gen.r * shift;
    s.base.resize(d);
    for (int j = 0; j < d; ++j) {
        s.base(j) = std::log(p.s0 / d) + p.log_drift(j + 1) + s.drift_row(j);
    }
    s.strike = p.k;
    s.s0 = p.s0;
    s.discount = p.discount();
    return s;
}

namespace detail {

/// Per-call scratch: b_j = base_j + A[j,1:] z_rest and c_j = A[j,0].
struct GammaProblem {
    const SeparableData& data;
    Vector b;
    double log_k;

    GammaProblem(const SeparableData& s, std::span<const double> z_rest)
        : data(s), b(s.base), log_k(std::log(s.strike))
    {
        const auto rest = static_cast<Eigen::Index>(z_rest.size());
        if (rest > 0) {
            b.noalias() += s.a.rightCols(rest) * Eigen::Map<const Vector>(z_rest.data(), rest);
        }
    }

    /// log(mean S) - log K at z_1 = x, and its derivative.
    void eval(double x, double& f, double& df) const
    {
        const auto& c = data.a.col(0);
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            top = std::max(top, b(j) + c(j) * x);
        }
        double sum = 0.0;
        double weighted = 0.0;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const double e = std::exp(b(j) + c(j) * x - top);
            sum += e;
            weighted += e * c(j);
        }
        f = top + std::log(sum) - log_k;
        df = weighted / sum;
    }

    double value(double x) const
    {
        double f = 0.0;
        double df = 0.0;
        eval(x, f, df);
        return f;
    }
};

} // namespace detail

/// Root gamma of k3(., z_rest) in z_1 on [-40, 40]; -inf if k3 > 0 on the
/// whole bracket (indicator always on), +inf if k3 < 0 on it. Gaussian mass
/// outside the bracket is below 1e-300, so no wider search is made.
inline double find_gamma(const SeparableData& s, std::span<const double> z_rest)
{
    const detail::GammaProblem prob(s, z_rest);
    double lo = -40.0;
    double hi = 40.0;
    const double f_lo = prob.value(lo);
    const double f_hi = prob.value(hi);
    if (f_lo > f_hi) {
        throw SeparabilityViolation("find_gamma: indicator is not monotone in the first variable");
    }
    if (f_lo > 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    if (f_hi < 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    if (f_lo == 0.0) {
        return lo;
    }
    if (f_hi == 0.0) {
        return hi;
    }

    // Newton from the upper end converges monotonically for a convex
    // increasing function; bisection guards every step.
    double x = hi;
    for (int it = 0; it < 200; ++it) {
        double f = 0.0;
        double df = 0.0;
        prob.eval(x, f, df);
        if (f == 0.0) {
            return x;
        }
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        double next = df > 0.0 ? x - f / df : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x)) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

/// k3(z_1, z_rest) = mean(S) - K, for checking roots.
inline double separable_indicator_value(const SeparableData& s, double z1,
                                        std::span<const double> z_rest)
{
    const detail::GammaProblem prob(s, z_rest);
    return s.strike * std::expm1(prob.value(z1));
}

namespace detail {

// exp(x) Phi~(t) without intermediate overflow or underflow.
inline double exp_times_tail(double x, double t)
{
    if (t == -std::numeric_limits<double>::infinity()) {
        return std::exp(x);
    }
    return std::exp(x + log_big_phi_tilde(t));
}

struct PreintTerms {
    double i1 = 0.0;
    double i2 = 0.0;
};

inline PreintTerms preint_terms(const SeparableData& s, std::span<const double> z_rest,
                                bool with_strike)
{
    const double gamma = find_gamma(s, z_rest);
    PreintTerms t;
    if (gamma == std::numeric_limits<double>::infinity()) {
        return t;
    }
    const auto rest = static_cast<Eigen::Index>(z_rest.size());
    const Eigen::Map<const Vector> zr(z_rest.data(), rest);
    Vector exponent = s.base;
    if (rest > 0) {
        exponent.noalias() += s.w.rightCols(rest) * zr;
    }
    for (Eigen::Index j = 0; j < exponent.size(); ++j) {
        const double c = s.w(j, 0);
        t.i1 += exp_times_tail(exponent(j) + 0.5 * c * c, gamma - c);
    }
    if (with_strike) {
        const double b1 = s.beta(0);
        const double lin = rest > 0 ? s.beta.tail(rest).dot(zr) : 0.0;
        t.i2 = -s.strike * exp_times_tail(-lin + 0.5 * b1 * b1, gamma + b1);
    }
    return t;
}

} // namespace detail

/// Undiscounted preintegrated price k0 (I1 + I2) at z_rest.
inline double preint_price(const SeparableData& s, std::span<const double> z_rest)
{
    const auto t = detail::preint_terms(s, z_rest, true);
    const double value = t.i1 + t.i2;
    if (value < 0.0) {
        if (value < -1e-12 * t.i1) {
            throw InternalConsistency("preint_price: negative preintegrated value " +
                                      std::to_string(value));
        }
        return 0.0;
    }
    return s.k0 * value;
}

/// Preintegrated pathwise Delta e^{-rT} (k0 / s0) I1 at z_rest.
inline double preint_delta(const SeparableData& s, std::span<const double> z_rest)
{
    const auto t = detail::preint_terms(s, z_rest, false);
    return s.discount * s.k0 / s.s0 * t.i1;
}

/// The (d-1)-dimensional preintegrated function for the given target.
inline Integrand preint_integrand(SeparableData s, Target target)
{
    if (target == Target::Price) {
        return [s = std::move(s)](std::span<const double> z) { return preint_price(s, z); };
    }
    return [s = std::move(s)](std::span<const double> z) { return preint_delta(s, z); };
}

} // namespace qmcvr
