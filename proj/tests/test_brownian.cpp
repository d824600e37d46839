#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "qmcvr/brownian.hpp"

using namespace qmcvr;

TEST(TimeGrid, Validation)
{
    EXPECT_THROW(TimeGrid(0, 1.0), DomainError);
    EXPECT_THROW(TimeGrid(3, 0.0), DomainError);
    const TimeGrid g(4, 2.0);
    EXPECT_EQ(g.dt(), 0.5);
    EXPECT_EQ(g.time(4), 2.0);
}

TEST(Covariance, SmallGrid)
{
    const auto s = covariance(TimeGrid(3, 3.0));
    EXPECT_EQ(s(0, 0), 1.0);
    EXPECT_EQ(s(0, 2), 1.0);
    EXPECT_EQ(s(1, 2), 2.0);
    EXPECT_EQ(s(2, 2), 3.0);
}

TEST(GenStd, TwoSteps)
{
    const auto g = gen_std(TimeGrid(2, 1.0));
    const double h = std::sqrt(0.5);
    EXPECT_EQ(g.r(0, 0), h);
    EXPECT_EQ(g.r(0, 1), 0.0);
    EXPECT_EQ(g.r(1, 0), h);
    EXPECT_EQ(g.r(1, 1), h);
}

TEST(Generators, ReproduceCovariance)
{
    for (int d : {1, 8, 50}) {
        const TimeGrid grid(d, 1.0);
        const Matrix sigma = covariance(grid).matrix();
        for (const auto& g : {gen_std(grid), gen_pca(grid)}) {
            EXPECT_LE(max_abs(g.r * g.r.transpose() - sigma), 1e-12) << d;
        }
    }
}

TEST(GenPca, ColumnNormsAreRootEigenvalues)
{
    const TimeGrid grid(8, 1.0);
    const auto g = gen_pca(grid);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(covariance(grid).matrix());
    for (int k = 0; k < 8; ++k) {
        EXPECT_NEAR(g.r.col(k).norm(), std::sqrt(ref.eigenvalues()(7 - k)), 1e-12);
        if (k > 0) {
            EXPECT_GT(g.r.col(k - 1).norm(), g.r.col(k).norm());
        }
    }
    // The leading component is a positive level shift of the whole path.
    EXPECT_GT(g.r.col(0).minCoeff(), 0.0);
}

TEST(PathGenerator, ApplyMatchesMatrixProduct)
{
    const TimeGrid grid(6, 1.5);
    const Vector z = Vector::LinSpaced(6, -1.0, 2.0);
    for (const auto& g : {gen_std(grid), gen_pca(grid)}) {
        std::vector<double> out(6);
        g.apply({z.data(), 6}, out);
        const Vector ref = g.r * z;
        for (int j = 0; j < 6; ++j) {
            EXPECT_NEAR(out[j], ref(j), 1e-14);
        }
    }
}
