#pragma once

// Small dense symmetric linear algebra (d <= 64).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "qmcvr/errors.hpp"

namespace qmcvr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Square matrix symmetrized on construction, so (i,j) and (j,i) are
/// bitwise equal.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(const Matrix& m)
    {
        if (m.rows() != m.cols()) {
            throw DomainError("SymMatrix: matrix is not square");
        }
        entries_ = 0.5 * (m + m.transpose());
    }

    Eigen::Index dim() const { return entries_.rows(); }
    const Matrix& matrix() const { return entries_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

    double max_abs() const { return entries_.size() == 0 ? 0.0 : entries_.cwiseAbs().maxCoeff(); }

private:
    Matrix entries_;
};

struct EigenPair {
    Matrix q;      ///< eigenvectors as columns
    Vector lambda; ///< eigenvalues, descending
};

/// Cyclic Jacobi eigendecomposition. Sweeps until the off-diagonal
/// Frobenius norm is at most 1e-14 of the full norm; columns are returned
/// sorted by descending eigenvalue (stable for ties).
inline EigenPair sym_eigen(const SymMatrix& c)
{
    const Eigen::Index n = c.dim();
    Matrix a = c.matrix();
    Matrix v = Matrix::Identity(n, n);

    const double total = a.norm();
    const auto off_norm = [&a, n] {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i != j) {
                    sum += a(i, j) * a(i, j);
                }
            }
        }
        return std::sqrt(sum);
    };

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        if (off_norm() <= 1e-14 * total) {
            break;
        }
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = cs * akp - sn * akq;
                    a(k, q) = sn * akp + cs * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = cs * apk - sn * aqk;
                    a(q, k) = sn * apk + cs * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = cs * vkp - sn * vkq;
                    v(k, q) = sn * vkp + cs * vkq;
                }
            }
        }
    }
    if (sweep == kMaxSweeps && off_norm() > 1e-14 * total) {
        throw NumericalError("sym_eigen: Jacobi iteration did not converge in 100 sweeps");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    EigenPair out{Matrix(n, n), Vector(n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        out.lambda(k) = a(src, src);
        out.q.col(k) = v.col(src);
    }
    return out;
}

/// Lower-triangular L with L L^T = s. Throws NotPositiveDefinite when a
/// pivot is not positive.
inline Matrix cholesky(const SymMatrix& s)
{
    Eigen::LLT<Matrix> llt(s.matrix());
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("cholesky: matrix is not positive definite");
    }
    Matrix l = llt.matrixL();
    return l;
}

/// Solves L x = b for lower-triangular L.
inline Matrix lower_solve(const Matrix& l, const Matrix& b)
{
    return l.triangularView<Eigen::Lower>().solve(b);
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// max |Q^T Q - I|
inline double orthogonality_error(const Matrix& q)
{
    return max_abs(q.transpose() * q - Matrix::Identity(q.cols(), q.cols()));
}

} // namespace qmcvr
