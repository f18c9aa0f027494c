#pragma once

// Iterative multidimensional HODMD on I1 x I2 x K snapshot tensors.
//
// Each pass replaces the first SVD reduction by a truncated HOSVD, runs the
// delay-embedded Koopman fit on the temporal modes and rebuilds the tensor from
// the resulting expansion. The rebuilt tensor feeds the next pass until the
// retained HOSVD ranks (P1, P2, N) repeat.

#include "hodmd/dmd.hpp"
#include "hodmd/hosvd.hpp"
#include "hodmd/linalg.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace hodmd {

struct TensorDmdExpansion {
    DmdExpansion expansion;  // spatial modes flattened i1-fastest, length I1*I2
    std::size_t rows = 0;    // I1
    std::size_t cols = 0;    // I2

    // Mode m as an I1 x I2 complex image.
    ComplexMatrix mode_image(std::size_t m) const
    {
        const ComplexVector& s = expansion.modes.at(m).spatial;
        return Eigen::Map<const ComplexMatrix>(s.data(), static_cast<Eigen::Index>(rows),
                                               static_cast<Eigen::Index>(cols));
    }
};

struct IterationRecord {
    std::array<std::size_t, 3> ranks{};  // (P1, P2, N)
    std::size_t num_modes = 0;
    double rrmse = 0.0;                  // against the original input tensor
};

struct MultidimResult {
    TensorDmdExpansion expansion;
    std::vector<IterationRecord> trace;
    bool converged = false;
    Order3Tensor reconstruction;
    ReconstructionReport report;  // from the final pass
    Warnings warnings;
};

struct TensorReduction {
    RealMatrix basis;    // (I1*I2) x r, orthonormal columns
    RealMatrix reduced;  // r x K
};

/// Orthonormal spatial basis and reduced snapshots equivalent to the truncated
/// HOSVD: with C the mode-3 unfolding of the core (transposed) and C = U S V^T,
/// the flattened tensor is (W2 (x) W1) U * (S V^T T^T). Without spatial
/// truncation the reduced rows are the temporal modes scaled by their singular
/// values.
inline TensorReduction reduce_tensor(const HOSVDResult& h, std::size_t i1, std::size_t i2)
{
    const Eigen::Index p1 = h.factor1.cols();
    const Eigen::Index p2 = h.factor2.cols();
    const RealMatrix c = unfold(h.core, 3).transpose();
    const TruncatedSVD svd = truncated_svd(c, 0.0);
    const auto r = static_cast<Eigen::Index>(svd.retained_rank);

    TensorReduction out;
    out.basis.resize(static_cast<Eigen::Index>(i1 * i2), r);
    for (Eigen::Index j = 0; j < r; ++j) {
        const Eigen::Map<const RealMatrix> g(svd.left.col(j).data(), p1, p2);
        const RealMatrix image = h.factor1 * g * h.factor2.transpose();
        out.basis.col(j) = Eigen::Map<const RealVector>(image.data(), image.size());
    }
    out.reduced = svd.singular_values.asDiagonal() * svd.right.transpose() * h.temporal_factor.transpose();
    return out;
}

/// Temporal tolerance is config.eps_svd; both spatial modes use eps_spatial.
/// A run that hits max_iters without two consecutive passes sharing (P1, P2, N)
/// returns with converged = false.
inline MultidimResult run_multidim_hodmd(const Order3Tensor& t, const HodmdConfig& config,
                                         double eps_spatial, std::size_t max_iters = 20,
                                         bool zero_growth = false)
{
    const auto [i1, i2, k] = t.dims();
    if (k < config.d + 2) {
        throw InputError("run_multidim_hodmd: need K >= d + 2 snapshots");
    }
    if (max_iters < 1) {
        throw InputError("run_multidim_hodmd: max_iters must be >= 1");
    }
    config.validate(k);
    if (!(eps_spatial >= 0.0 && eps_spatial < 1.0)) {
        throw InputError("run_multidim_hodmd: eps_spatial must lie in [0, 1)");
    }

    const RealMatrix original = t.as_matrix();
    const auto times = snapshot_times(k, config.dt, config.t1);

    MultidimResult out;
    out.expansion.rows = i1;
    out.expansion.cols = i2;
    Order3Tensor state = t;
    for (std::size_t it = 0; it < max_iters; ++it) {
        const HOSVDResult h = hosvd(state, eps_spatial, config.eps_svd);
        const TensorReduction red = reduce_tensor(h, i1, i2);
        ReducedFit fit = fit_reduced_dynamics(red.reduced, red.basis, config, &out.warnings);

        DmdExpansion& e = out.expansion.expansion;
        e.modes = std::move(fit.modes);
        e.dt = config.dt;
        e.t1 = config.t1;
        e.num_snapshots = k;
        e.state_dim = i1 * i2;

        const RealMatrix recon = reconstruct(e, times, zero_growth, &out.warnings);
        Order3Tensor next(t.dims());
        next.as_matrix() = recon;

        IterationRecord rec;
        rec.ranks = h.ranks();
        rec.num_modes = e.modes.size();
        rec.rrmse = rrmse(original, recon);
        if (!out.trace.empty() && rec.rrmse > out.trace.back().rrmse + 1e-10) {
            warn(&out.warnings, "run_multidim_hodmd: RRMSE increased from " +
                                    std::to_string(out.trace.back().rrmse) + " to " +
                                    std::to_string(rec.rrmse) + " at iteration " + std::to_string(it + 1));
        }
        const bool repeated = !out.trace.empty() && out.trace.back().ranks == rec.ranks;
        out.trace.push_back(rec);

        out.report.rrmse = rec.rrmse;
        out.report.retained_spatial_rank = static_cast<std::size_t>(red.basis.cols());
        out.report.retained_temporal_rank = fit.temporal_rank;
        out.report.num_modes = rec.num_modes;
        out.reconstruction = std::move(next);
        if (repeated) {
            out.converged = true;
            break;
        }
        state = out.reconstruction;
    }
    if (!out.converged) {
        warn(&out.warnings, "run_multidim_hodmd: HOSVD ranks did not settle within " +
                                std::to_string(max_iters) + " iterations");
    }
    return out;
}

} // namespace hodmd
