#pragma once

// Standard normal density, distribution, survival and quantile functions.

#include <array>
#include <cmath>
#include <numbers>

#include "qmcvr/errors.hpp"

namespace qmcvr {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

inline double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double big_phi(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

/// Survival function 1 - Phi(x), evaluated through erfc so that the upper
/// tail keeps full relative precision (down to ~1e-300 near x = 37).
inline double big_phi_tilde(double x) { return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0); }

/// log(1 - Phi(x)). Beyond x = 37 the survival function is subnormal, so
/// the Mills-ratio asymptotic series is used instead.
inline double log_big_phi_tilde(double x)
{
    if (x < 37.0) {
        return std::log(big_phi_tilde(x));
    }
    const double inv2 = 1.0 / (x * x);
    // 1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - 945/x^10
    const double series =
        1.0 + inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * (105.0 - 945.0 * inv2))));
    return -0.5 * x * x - kLogSqrt2Pi - std::log(x) + std::log(series);
}

namespace detail {

// Acklam's rational approximation of the lower half of the quantile,
// relative error below 1.15e-9 before refinement.
inline double quantile_lower_half(double u)
{
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double kLowBreak = 0.02425;

    double x;
    if (u < kLowBreak) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    // One Newton step on Phi(x) - u.
    const double density = phi(x);
    if (density > 0.0) {
        x -= (big_phi(x) - u) / density;
    }
    return x;
}

} // namespace detail

/// Standard normal quantile. Throws DomainError outside (0, 1).
inline double big_phi_inv(double u)
{
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("big_phi_inv: argument must lie in (0, 1)");
    }
    if (u <= 0.5) {
        return detail::quantile_lower_half(u);
    }
    // 1 - u is exact here (Sterbenz), so the upper tail is mirrored losslessly.
    return -detail::quantile_lower_half(1.0 - u);
}

} // namespace qmcvr
