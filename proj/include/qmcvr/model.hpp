#pragma once

// Black-Scholes asset paths, the arithmetic Asian call payoff and the
// pathwise Delta integrand.

#include <cmath>
#include <span>
#include <vector>

#include "qmcvr/brownian.hpp"
#include "qmcvr/errors.hpp"
#include "qmcvr/integrand.hpp"

namespace qmcvr {

struct MarketParams {
    double s0 = 100.0;
    double k = 100.0;
    double r = 0.0;
    double sigma = 0.2;
    TimeGrid grid;

    void validate() const
    {
        if (!(s0 > 0.0)) {
            throw DomainError("MarketParams: s0 must be positive");
        }
        if (!(k > 0.0)) {
            throw DomainError("MarketParams: strike must be positive");
        }
        if (!(sigma > 0.0)) {
            throw DomainError("MarketParams: sigma must be positive");
        }
        if (!std::isfinite(r)) {
            throw DomainError("MarketParams: rate must be finite");
        }
    }

    int d() const { return grid.d; }
    double discount() const { return std::exp(-r * grid.maturity); }

    /// (r - sigma^2/2) t_j for the 1-based observation index j.
    double log_drift(int j) const { return (r - 0.5 * sigma * sigma) * grid.time(j); }
};

/// S_j = s0 exp((r - sigma^2/2) t_j + sigma (R z)_j), j = 1..d.
inline void asset_path(const MarketParams& p, const PathGenerator& gen, std::span<const double> z,
                       std::span<double> out)
{
    gen.apply(z, out);
    for (int j = 0; j < p.d(); ++j) {
        out[j] = p.s0 * std::exp(p.log_drift(j + 1) + p.sigma * out[j]);
    }
}

inline std::vector<double> asset_path(const MarketParams& p, const PathGenerator& gen,
                                      std::span<const double> z)
{
    std::vector<double> s(static_cast<std::size_t>(p.d()));
    asset_path(p, gen, z, s);
    return s;
}

/// Arithmetic average of S_1..S_d (S_0 excluded).
inline double average_price(const MarketParams& p, const PathGenerator& gen,
                            std::span<const double> z)
{
    std::vector<double> s(static_cast<std::size_t>(p.d()));
    asset_path(p, gen, z, s);
    double sum = 0.0;
    for (double v : s) {
        sum += v;
    }
    return sum / p.d();
}

/// Undiscounted payoff (mean(S) - K)_+.
inline double asian_payoff(const MarketParams& p, const PathGenerator& gen,
                           std::span<const double> z)
{
    const double excess = average_price(p, gen, z) - p.k;
    return excess > 0.0 ? excess : 0.0;
}

/// Pathwise Delta integrand e^{-rT} (mean(S)/s0) 1{mean(S) > K}.
inline double delta_pw_integrand(const MarketParams& p, const PathGenerator& gen,
                                 std::span<const double> z)
{
    const double avg = average_price(p, gen, z);
    return avg > p.k ? p.discount() * avg / p.s0 : 0.0;
}

/// Exact gradient of asian_payoff in z (zero on the out-of-the-money set):
/// (sigma/d) sum_j S_j R[j,:]^T.
inline void asian_payoff_gradient(const MarketParams& p, const PathGenerator& gen,
                                  std::span<const double> z, std::span<double> grad)
{
    const int d = p.d();
    std::vector<double> s(static_cast<std::size_t>(d));
    asset_path(p, gen, z, s);
    double avg = 0.0;
    for (double v : s) {
        avg += v;
    }
    avg /= d;
    Eigen::Map<Vector> g(grad.data(), d);
    if (!(avg > p.k)) {
        g.setZero();
        return;
    }
    Eigen::Map<const Vector> sv(s.data(), d);
    g = (p.sigma / d) * (gen.r.transpose() * sv);
}

inline Integrand payoff_integrand(MarketParams p, PathGenerator gen)
{
    return [p = std::move(p), gen = std::move(gen)](std::span<const double> z) {
        return asian_payoff(p, gen, z);
    };
}

inline Integrand delta_integrand(MarketParams p, PathGenerator gen)
{
    return [p = std::move(p), gen = std::move(gen)](std::span<const double> z) {
        return delta_pw_integrand(p, gen, z);
    };
}

} // namespace qmcvr
