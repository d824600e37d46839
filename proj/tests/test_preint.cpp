#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qmcvr/actsub.hpp"
#include "qmcvr/impsamp.hpp"
#include "qmcvr/preint.hpp"
#include "qmcvr/sampling.hpp"
#include "support/oracles.hpp"
#include "support/preint_oracle.hpp"

using namespace qmcvr;

namespace {

MarketParams market(int d, double s0, double k, double r, double sigma)
{
    MarketParams p;
    p.s0 = s0;
    p.k = k;
    p.r = r;
    p.sigma = sigma;
    p.grid = TimeGrid(d, 1.0);
    return p;
}

struct Transform {
    Matrix q;
    Vector mu;
};

// Drift and active subspace of the shifted price payoff.
Transform is_as_transform(const MarketParams& p, std::uint64_t seed)
{
    const auto gen = gen_std(p.grid);
    const Vector mu = solve_optimal_drift_asian(p).mu;
    const auto gi = shift_integrand(payoff_integrand(p, gen), mu);
    const auto as = active_subspace(estimate_c(gi, gaussian_rqmc_points(p.d(), 128, {seed, 0})),
                                    gen.r);
    return {as.q, mu};
}

std::vector<double> tail(const Vector& z)
{
    return {z.data() + 1, z.data() + z.size()};
}

} // namespace

TEST(BuildSeparable, ZeroDrift)
{
    const auto p = market(5, 100.0, 100.0, 0.1, 0.4);
    const auto gen = gen_std(p.grid);
    const auto s = build_separable(p, gen);
    EXPECT_EQ(s.k0, 1.0);
    EXPECT_EQ(s.beta.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE(max_abs(s.w - p.sigma * gen.r), 1e-15);
    EXPECT_TRUE(s.q_first_col_pos);
}

TEST(BuildSeparable, TwoStepsStandardConstruction)
{
    const auto p = market(2, 100.0, 100.0, 0.1, 0.4);
    const auto s = build_separable(p, gen_std(p.grid));
    const double h = 0.4 * std::sqrt(0.5);
    EXPECT_NEAR(s.w(0, 0), h, 1e-15);
    EXPECT_EQ(s.w(0, 1), 0.0);
    EXPECT_NEAR(s.w(1, 0), h, 1e-15);
    EXPECT_NEAR(s.w(1, 1), h, 1e-15);
}

TEST(BuildSeparable, RejectsNegativeFirstColumn)
{
    const auto p = market(3, 100.0, 100.0, 0.1, 0.4);
    Matrix q = Matrix::Identity(3, 3);
    q(0, 0) = -1.0;
    EXPECT_THROW(build_separable(p, gen_std(p.grid), q), SeparabilityViolation);
}

// k0 (k1 + k2) 1{k3 > 0} evaluated from the separable data equals the
// shifted payoff at Q z.
TEST(BuildSeparable, ReproducesShiftedRotatedPayoff)
{
    const auto p = market(12, 100.0, 110.0, 0.1, 0.4);
    const auto gen = gen_std(p.grid);
    const auto t = is_as_transform(p, 4);
    const auto s = build_separable(p, gen, t.q, t.mu);
    const auto gia = rotate_integrand(shift_integrand(payoff_integrand(p, gen), t.mu), t.q);
    for (const auto& z : oracle::gaussian_points(12, 100, 5)) {
        const double k1 = (s.base + s.w * z).array().exp().sum();
        const double k2 = -p.k * std::exp(-s.beta.dot(z));
        const double k3 = (s.base + s.a * z).array().exp().sum() - p.k;
        const double value = k3 > 0.0 ? s.k0 * (k1 + k2) : 0.0;
        const double ref = gia(oracle::span_of(z));
        EXPECT_NEAR(value, ref, 1e-10 * (1.0 + std::abs(ref)));
    }
}

TEST(FindGamma, SingleStepAnalyticRoot)
{
    const auto p = market(1, 100.0, 120.0, 0.1, 0.4);
    const auto s = build_separable(p, gen_std(p.grid));
    const double expected = (std::log(120.0 / 100.0) - (0.1 - 0.08)) / 0.4;
    EXPECT_NEAR(find_gamma(s, {}), expected, 1e-13);
}

TEST(FindGamma, Sentinels)
{
    auto p = market(4, 100.0, 1e-12, 0.1, 0.4);
    const std::vector<double> z(3, 0.0);
    EXPECT_EQ(find_gamma(build_separable(p, gen_std(p.grid)), z),
              -std::numeric_limits<double>::infinity());
    p.k = 1e300;
    const auto far = build_separable(p, gen_std(p.grid));
    EXPECT_EQ(find_gamma(far, z), std::numeric_limits<double>::infinity());
    EXPECT_EQ(preint_price(far, z), 0.0);
    EXPECT_EQ(preint_delta(far, z), 0.0);
}

TEST(FindGamma, ResidualContract)
{
    const auto p = market(50, 100.0, 100.0, 0.1, 0.4);
    const auto s = build_separable(p, gen_std(p.grid));
    for (const auto& z : oracle::gaussian_points(49, 1000, 6)) {
        const auto zr = oracle::span_of(z);
        const double gamma = find_gamma(s, zr);
        ASSERT_TRUE(std::isfinite(gamma));
        ASSERT_LE(std::abs(separable_indicator_value(s, gamma, zr)), 1e-10 * (1.0 + p.k));
    }
}

TEST(FindGamma, ContinuousAlongLines)
{
    const auto p = market(16, 100.0, 100.0, 0.1, 0.4);
    const auto t = is_as_transform(p, 2);
    const auto s = build_separable(p, gen_std(p.grid), t.q, t.mu);
    const auto ends = oracle::gaussian_points(15, 20, 8);
    for (std::size_t line = 0; line + 1 < ends.size(); line += 2) {
        double prev = find_gamma(s, oracle::span_of(ends[line]));
        for (int step = 1; step <= 400; ++step) {
            const double a = step / 400.0;
            const Vector z = (1.0 - a) * ends[line] + a * ends[line + 1];
            const double g = find_gamma(s, oracle::span_of(z));
            ASSERT_LT(std::abs(g - prev), 0.1) << "line " << line << " step " << step;
            prev = g;
        }
    }
}

TEST(PreintPrice, SingleStepIsBlackScholes)
{
    const auto p = market(1, 100.0, 100.0, 0.1, 0.4);
    const auto s = build_separable(p, gen_std(p.grid));
    const double ref = std::exp(0.1) * oracle::black_scholes_call(100.0, 100.0, 0.1, 0.4, 1.0);
    EXPECT_NEAR(preint_price(s, {}), ref, 1e-10 * ref);
    const double delta = oracle::black_scholes_delta(100.0, 100.0, 0.1, 0.4, 1.0);
    EXPECT_NEAR(preint_delta(s, {}), delta, 1e-10 * delta);
}

TEST(PreintPrice, MatchesQuadratureOnSlices)
{
    for (double k : {80.0, 100.0, 150.0}) {
        const auto p = market(8, 100.0, k, 0.1, 0.4);
        const auto gen = gen_std(p.grid);
        for (bool transformed : {false, true}) {
            const auto t = transformed ? is_as_transform(p, 3)
                                       : Transform{Matrix::Identity(8, 8), Vector::Zero(8)};
            const auto s = build_separable(p, gen, t.q, t.mu);
            const oracle::SliceProblem slice{p, gen, t.q, t.mu};
            for (const auto& z : oracle::gaussian_points(7, 20, 10 + static_cast<int>(k))) {
                const auto zr = oracle::span_of(z);
                const double price = slice.slice_integral(zr, false);
                const double delta = slice.slice_integral(zr, true);
                EXPECT_NEAR(preint_price(s, zr), price, 1e-8 * price) << k;
                EXPECT_NEAR(preint_delta(s, zr), delta, 1e-8 * delta) << k;
            }
        }
    }
}

TEST(PreintDelta, TinyStrikeMatchesQuadrature)
{
    const auto p = market(6, 100.0, 1e-12, 0.1, 0.4);
    const auto gen = gen_std(p.grid);
    const auto s = build_separable(p, gen);
    const oracle::SliceProblem slice{p, gen, Matrix::Identity(6, 6), Vector::Zero(6)};
    for (const auto& z : oracle::gaussian_points(5, 10, 31)) {
        const auto zr = oracle::span_of(z);
        const double ref = slice.slice_integral(zr, true);
        EXPECT_NEAR(preint_delta(s, zr), ref, 1e-8 * ref);
    }
}

TEST(Preint, LawOfTotalExpectationForPrice)
{
    const auto p = market(50, 100.0, 120.0, 0.1, 0.4);
    const auto gen = gen_std(p.grid);
    const auto t = is_as_transform(p, 1);
    const auto s = build_separable(p, gen, t.q, t.mu);
    const auto raw = payoff_integrand(p, gen);
    std::vector<double> full;
    std::vector<double> pre;
    for (const auto& z : oracle::gaussian_points(50, 1 << 16, 17)) {
        full.push_back(raw(oracle::span_of(z)));
        pre.push_back(preint_price(s, tail(z)));
    }
    const auto a = oracle::summarize(full);
    const auto b = oracle::summarize(pre);
    EXPECT_LT(oracle::z_score(a, b), 3.0);
    EXPECT_LT(b.variance, a.variance);
}

TEST(Preint, LawOfTotalExpectationForDelta)
{
    const auto p = market(16, 50.0, 60.0, 0.05, 0.3);
    const auto gen = gen_std(p.grid);
    const auto t = is_as_transform(p, 1);
    const auto s = build_separable(p, gen, t.q, t.mu);
    const auto raw = delta_integrand(p, gen);
    std::vector<double> full;
    std::vector<double> pre;
    for (const auto& z : oracle::gaussian_points(16, 1 << 16, 18)) {
        full.push_back(raw(oracle::span_of(z)));
        pre.push_back(preint_delta(s, tail(z)));
    }
    EXPECT_LT(oracle::z_score(oracle::summarize(full), oracle::summarize(pre)), 3.0);
}

// Conditioning on z_rest cannot increase variance: compare the plain
// preintegrated function with the raw payoff on the same points.
TEST(Preint, VarianceDoesNotIncrease)
{
    for (double k : {80.0, 100.0, 130.0}) {
        const auto p = market(16, 100.0, k, 0.1, 0.4);
        const auto gen = gen_std(p.grid);
        const auto s = build_separable(p, gen);
        const auto raw = payoff_integrand(p, gen);
        std::vector<double> full;
        std::vector<double> pre;
        for (const auto& z : oracle::gaussian_points(16, 1 << 14, 19)) {
            full.push_back(raw(oracle::span_of(z)));
            pre.push_back(preint_price(s, tail(z)));
        }
        EXPECT_LE(oracle::summarize(pre).variance, oracle::summarize(full).variance) << k;
    }
}

// Along a line in z_rest that moves the kink of the raw payoff, second
// differences of the preintegrated function stay O(h^2), whereas the raw
// Delta integrand jumps.
TEST(Preint, SmoothAcrossFormerDiscontinuity)
{
    const auto p = market(8, 100.0, 100.0, 0.1, 0.4);
    const auto s = build_separable(p, gen_std(p.grid));
    const double h = 1e-3;
    for (const auto& base : oracle::gaussian_points(7, 10, 40)) {
        double worst = 0.0;
        for (int i = -500; i <= 500; ++i) {
            const auto at = [&](double t) {
                Vector z = base;
                z(0) += t;
                return preint_delta(s, oracle::span_of(z));
            };
            const double t = i * h;
            worst = std::max(worst, std::abs(at(t + h) - 2.0 * at(t) + at(t - h)));
        }
        EXPECT_LT(worst, 1e-4);
    }
}

TEST(Preint, NonnegativeOnWideSamples)
{
    const auto p = market(50, 100.0, 150.0, 0.1, 0.4);
    const auto t = is_as_transform(p, 2);
    const auto s = build_separable(p, gen_std(p.grid), t.q, t.mu);
    for (const auto& z : oracle::gaussian_points(49, 2000, 41)) {
        const Vector wide = 3.0 * z;
        const double v = preint_price(s, oracle::span_of(wide));
        ASSERT_TRUE(std::isfinite(v));
        ASSERT_GE(v, 0.0);
    }
}
