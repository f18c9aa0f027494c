#pragma once

// Independent reference computations for the test suites. None of these call
// into the library's factorization paths.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a)
{
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

/// Singular values from the eigenvalues of A^T A (or A A^T, whichever is smaller).
inline std::vector<double> gram_singular_values(const Eigen::MatrixXd& m)
{
    const bool wide = m.cols() > m.rows();
    const Eigen::Index n = wide ? m.rows() : m.cols();
    std::vector<std::vector<double>> g(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.0;
            if (wide) {
                for (Eigen::Index k = 0; k < m.cols(); ++k) s += m(i, k) * m(j, k);
            } else {
                for (Eigen::Index k = 0; k < m.rows(); ++k) s += m(k, i) * m(k, j);
            }
            g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
        }
    }
    auto ev = jacobi_eigenvalues(std::move(g));
    for (double& v : ev) v = std::sqrt(std::max(v, 0.0));
    return ev;
}

/// Numerical rank from the Gram eigenvalues with a relative cut on sigma.
inline std::size_t gram_rank(const Eigen::MatrixXd& m, double rel = 1e-6)
{
    const auto sv = gram_singular_values(m);
    std::size_t r = 0;
    for (double s : sv) {
        if (s > rel * sv.front()) ++r;
    }
    return r;
}

/// Brute-force Tucker product over flat i1-fastest storage.
inline std::vector<double> triple_loop_tprod(const std::vector<double>& core, std::size_t n1, std::size_t n2,
                                             std::size_t n3, const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2,
                                             const Eigen::MatrixXd& u3)
{
    const auto i1s = static_cast<std::size_t>(u1.rows());
    const auto i2s = static_cast<std::size_t>(u2.rows());
    const auto i3s = static_cast<std::size_t>(u3.rows());
    std::vector<double> out(i1s * i2s * i3s, 0.0);
    for (std::size_t i3 = 0; i3 < i3s; ++i3)
        for (std::size_t i2 = 0; i2 < i2s; ++i2)
            for (std::size_t i1 = 0; i1 < i1s; ++i1) {
                double s = 0.0;
                for (std::size_t c = 0; c < n3; ++c)
                    for (std::size_t b = 0; b < n2; ++b)
                        for (std::size_t a = 0; a < n1; ++a)
                            s += core[a + n1 * (b + n2 * c)] * u1(static_cast<Eigen::Index>(i1), static_cast<Eigen::Index>(a)) *
                                 u2(static_cast<Eigen::Index>(i2), static_cast<Eigen::Index>(b)) *
                                 u3(static_cast<Eigen::Index>(i3), static_cast<Eigen::Index>(c));
                out[i1 + i1s * (i2 + i2s * i3)] = s;
            }
    return out;
}

/// Classical exact DMD eigenvalues: X2 ~ A X1, projected on the leading `rank`
/// left singular vectors of X1.
inline Eigen::VectorXcd standalone_dmd_eigenvalues(const Eigen::MatrixXd& x, Eigen::Index rank)
{
    const Eigen::MatrixXd x1 = x.leftCols(x.cols() - 1);
    const Eigen::MatrixXd x2 = x.rightCols(x.cols() - 1);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
    const Eigen::MatrixXd v = svd.matrixV().leftCols(rank);
    const Eigen::VectorXd s = svd.singularValues().head(rank);
    const Eigen::MatrixXd atilde = u.transpose() * x2 * v * s.cwiseInverse().asDiagonal();
    Eigen::EigenSolver<Eigen::MatrixXd> es(atilde);
    return es.eigenvalues();
}

/// Largest distance between two eigenvalue sets under greedy nearest matching.
inline double eigenvalue_set_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = -1;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(a(i) - b(j));
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[static_cast<std::size_t>(arg)] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
    return m;
}

/// Snapshots x_k = P z_k of a latent linear system z_{k+1} = B z_k whose
/// eigenvalues are the given conjugate pairs r e^{+-i theta}.
inline Eigen::MatrixXd linear_dynamics_data(const std::vector<std::complex<double>>& upper_half_eigs,
                                            Eigen::Index j, Eigen::Index k, std::uint64_t seed)
{
    const auto q = static_cast<Eigen::Index>(2 * upper_half_eigs.size());
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(q, q);
    for (std::size_t i = 0; i < upper_half_eigs.size(); ++i) {
        const double re = upper_half_eigs[i].real();
        const double im = upper_half_eigs[i].imag();
        const auto o = static_cast<Eigen::Index>(2 * i);
        block(o, o) = re;
        block(o, o + 1) = -im;
        block(o + 1, o) = im;
        block(o + 1, o + 1) = re;
    }
    const Eigen::MatrixXd s = random_matrix(q, q, seed + 1) + 3.0 * Eigen::MatrixXd::Identity(q, q);
    const Eigen::MatrixXd b = s * block * s.inverse();
    const Eigen::MatrixXd p = random_matrix(j, q, seed + 2);
    Eigen::VectorXd z = random_matrix(q, 1, seed + 3);
    Eigen::MatrixXd x(j, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        x.col(c) = p * z;
        z = b * z;
    }
    return x;
}

} // namespace oracle
