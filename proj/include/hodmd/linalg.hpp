#pragma once

// Dense containers and factorization kernels shared by every other module:
// truncated SVD, mode-k unfolding of third-order tensors and the Tucker
// tensor product.

#include "hodmd/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hodmd {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline void require_finite(const RealMatrix& m, const char* what)
{
    if (m.rows() < 1 || m.cols() < 1) {
        throw InputError(std::string(what) + ": matrix must have at least one row and one column");
    }
    if (!m.allFinite()) {
        throw InputError(std::string(what) + ": non-finite entries");
    }
}

/// Real third-order tensor T(i1, i2, k).
///
/// Storage is contiguous with i1 varying fastest, then i2, then k. A frontal
/// slice T(:, :, k) is therefore the column-major flattening of an I1 x I2
/// image, and the whole tensor viewed as an (I1*I2) x K column-major matrix is
/// the snapshot matrix.
class Order3Tensor {
public:
    using Dims = std::array<std::size_t, 3>;

    Order3Tensor() = default;

    explicit Order3Tensor(Dims dims)
        : dims_(checked(dims)), data_(dims_[0] * dims_[1] * dims_[2], 0.0)
    {
    }

    Order3Tensor(Dims dims, std::vector<double> data)
        : dims_(checked(dims)), data_(std::move(data))
    {
        if (data_.size() != dims_[0] * dims_[1] * dims_[2]) {
            throw InputError("Order3Tensor: entry count does not match dims");
        }
        for (double v : data_) {
            if (!std::isfinite(v)) {
                throw InputError("Order3Tensor: non-finite entries");
            }
        }
    }

    const Dims& dims() const noexcept { return dims_; }
    std::size_t dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode - 1)); }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i1, std::size_t i2, std::size_t k)
    {
        return data_[i1 + dims_[0] * (i2 + dims_[1] * k)];
    }
    double operator()(std::size_t i1, std::size_t i2, std::size_t k) const
    {
        return data_[i1 + dims_[0] * (i2 + dims_[1] * k)];
    }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    // (I1*I2) x K view; column k is slice k flattened column-major.
    Eigen::Map<const RealMatrix> as_matrix() const
    {
        return {data_.data(), static_cast<Eigen::Index>(dims_[0] * dims_[1]),
                static_cast<Eigen::Index>(dims_[2])};
    }
    Eigen::Map<RealMatrix> as_matrix()
    {
        return {data_.data(), static_cast<Eigen::Index>(dims_[0] * dims_[1]),
                static_cast<Eigen::Index>(dims_[2])};
    }

    double frobenius_norm() const { return as_matrix().norm(); }

    bool operator==(const Order3Tensor&) const = default;

private:
    static Dims checked(Dims dims)
    {
        if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
            throw InputError("Order3Tensor: all dims must be >= 1");
        }
        return dims;
    }

    Dims dims_{1, 1, 1};
    std::vector<double> data_ = std::vector<double>(1, 0.0);
};

/// Rank-truncated thin SVD, A ~ left * diag(singular_values) * right^T.
struct TruncatedSVD {
    RealMatrix left;             // rows(A) x N, orthonormal columns
    RealVector singular_values;  // N values, positive, nonincreasing
    RealMatrix right;            // cols(A) x N, orthonormal columns
    std::size_t retained_rank = 0;
    RealVector spectrum;         // every computed singular value, before truncation
};

// How the relative threshold treats a singular value sitting exactly on it.
enum class CutRule {
    drop_at_or_below,  // keep sigma_i / sigma_1 >  eps
    drop_below,        // keep sigma_i / sigma_1 >= eps
};

namespace detail {

// Flip so the largest-magnitude entry (first one on ties) is positive.
inline void fix_column_signs(RealMatrix& left, RealMatrix& right)
{
    for (Eigen::Index j = 0; j < left.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < left.rows(); ++i) {
            const double a = std::abs(left(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (left(arg, j) < 0.0) {
            left.col(j) *= -1.0;
            right.col(j) *= -1.0;
        }
    }
}

} // namespace detail

/// Truncated SVD with the relative rule sigma_{N+1}/sigma_1 <= eps_rel.
///
/// Singular values at or below max(rows, cols) * machine epsilon * sigma_1 are
/// numerically zero and always discarded, so eps_rel = 0 yields the numerical
/// rank. The factorization runs Eigen's divide-and-conquer SVD on the full
/// matrix (transposed when wide). Left singular vectors are sign-normalized so
/// their largest-magnitude entry is positive. `max_rank` (0 = none) caps N.
inline TruncatedSVD truncated_svd(const RealMatrix& a, double eps_rel,
                                  CutRule rule = CutRule::drop_at_or_below,
                                  std::size_t max_rank = 0)
{
    require_finite(a, "truncated_svd");
    if (!(eps_rel >= 0.0 && eps_rel < 1.0)) {
        throw InputError("truncated_svd: eps_rel must lie in [0, 1)");
    }
    if (a.cwiseAbs().maxCoeff() == 0.0) {
        throw NumericalError("zero matrix has no spectral content");
    }

    const bool wide = a.cols() > a.rows();
    RealMatrix u;
    RealMatrix v;
    RealVector s;
    if (wide) {
        Eigen::BDCSVD<RealMatrix> svd(a.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = svd.matrixV();
        v = svd.matrixU();
        s = svd.singularValues();
    } else {
        Eigen::BDCSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = svd.matrixU();
        v = svd.matrixV();
        s = svd.singularValues();
    }

    const double sigma1 = s(0);
    const double floor = sigma1 * static_cast<double>(std::max(a.rows(), a.cols())) *
                         std::numeric_limits<double>::epsilon();
    Eigen::Index n = 0;
    while (n < s.size()) {
        const double sv = s(n);
        if (sv <= floor || sv == 0.0) {
            break;
        }
        const double ratio = sv / sigma1;
        const bool keep = rule == CutRule::drop_at_or_below ? ratio > eps_rel : ratio >= eps_rel;
        if (!keep) {
            break;
        }
        ++n;
    }
    if (max_rank > 0) {
        n = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(max_rank));
    }

    TruncatedSVD out;
    out.left = u.leftCols(n);
    out.right = v.leftCols(n);
    out.singular_values = s.head(n);
    out.retained_rank = static_cast<std::size_t>(n);
    out.spectrum = s;
    detail::fix_column_signs(out.left, out.right);
    return out;
}

/// Mode-k matricization (k = 1, 2, 3) with cyclic column order:
///   mode 1: I1 x (I2*K),  column = i2 + I2*k
///   mode 2: I2 x (K*I1),  column = k  + K*i1
///   mode 3: K  x (I1*I2), column = i1 + I1*i2
inline RealMatrix unfold(const Order3Tensor& t, int mode)
{
    const auto [n1, n2, n3] = t.dims();
    const auto i1s = static_cast<Eigen::Index>(n1);
    const auto i2s = static_cast<Eigen::Index>(n2);
    const auto ks = static_cast<Eigen::Index>(n3);
    switch (mode) {
    case 1:
        return Eigen::Map<const RealMatrix>(t.data().data(), i1s, i2s * ks);
    case 2: {
        RealMatrix m(i2s, ks * i1s);
        for (Eigen::Index i1 = 0; i1 < i1s; ++i1)
            for (Eigen::Index k = 0; k < ks; ++k)
                for (Eigen::Index i2 = 0; i2 < i2s; ++i2)
                    m(i2, k + ks * i1) = t(i1, i2, k);
        return m;
    }
    case 3:
        return t.as_matrix().transpose();
    default:
        throw InputError("unfold: mode must be 1, 2 or 3");
    }
}

/// Inverse of unfold for the given target dims.
inline Order3Tensor fold(const RealMatrix& m, int mode, const Order3Tensor::Dims& dims)
{
    Order3Tensor t(dims);
    const auto i1s = static_cast<Eigen::Index>(dims[0]);
    const auto i2s = static_cast<Eigen::Index>(dims[1]);
    const auto ks = static_cast<Eigen::Index>(dims[2]);
    const auto expect = [&](Eigen::Index r, Eigen::Index c) {
        if (m.rows() != r || m.cols() != c) {
            throw InputError("fold: matrix shape does not match dims for mode " + std::to_string(mode));
        }
    };
    switch (mode) {
    case 1:
        expect(i1s, i2s * ks);
        Eigen::Map<RealMatrix>(t.data().data(), i1s, i2s * ks) = m;
        break;
    case 2:
        expect(i2s, ks * i1s);
        for (Eigen::Index i1 = 0; i1 < i1s; ++i1)
            for (Eigen::Index k = 0; k < ks; ++k)
                for (Eigen::Index i2 = 0; i2 < i2s; ++i2)
                    t(i1, i2, k) = m(i2, k + ks * i1);
        break;
    case 3:
        expect(ks, i1s * i2s);
        t.as_matrix() = m.transpose();
        break;
    default:
        throw InputError("fold: mode must be 1, 2 or 3");
    }
    return t;
}

/// Mode-k product T x_k U: replaces dimension k by rows(U).
inline Order3Tensor mode_product(const Order3Tensor& t, const RealMatrix& u, int mode)
{
    if (mode < 1 || mode > 3) {
        throw InputError("mode_product: mode must be 1, 2 or 3");
    }
    if (static_cast<std::size_t>(u.cols()) != t.dim(mode)) {
        throw InputError("mode_product: factor column count does not match tensor dim " +
                         std::to_string(mode));
    }
    if (u.rows() < 1) {
        throw InputError("mode_product: factor has no rows");
    }
    auto dims = t.dims();
    dims[static_cast<std::size_t>(mode - 1)] = static_cast<std::size_t>(u.rows());
    const RealMatrix product = u * unfold(t, mode);
    return fold(product, mode, dims);
}

/// out(i1,i2,i3) = sum core(n1,n2,n3) * u1(i1,n1) * u2(i2,n2) * u3(i3,n3)
inline Order3Tensor tprod(const Order3Tensor& core, const RealMatrix& u1, const RealMatrix& u2,
                          const RealMatrix& u3)
{
    return mode_product(mode_product(mode_product(core, u1, 1), u2, 2), u3, 3);
}

} // namespace hodmd
