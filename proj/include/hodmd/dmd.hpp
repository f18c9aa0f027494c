#pragma once

// Higher order dynamic mode decomposition (DMD-d).
//
// Pipeline: SVD reduction of the snapshot matrix, d-fold delay embedding of
// the reduced snapshots, a second SVD reduction, pseudo-inverse regression of
// the Koopman matrix, eigen-extraction, least-squares amplitude fit, amplitude
// truncation and reconstruction. With d = 1 this is classical DMD.

#include "hodmd/errors.hpp"
#include "hodmd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hodmd {

struct HodmdConfig {
    std::size_t d = 1;                     // delay index
    double eps_svd = 5e-4;                 // relative SVD tolerance (both reductions)
    double eps_dmd = 5e-4;                 // relative amplitude tolerance
    double dt = 4e-3;                      // seconds between snapshots
    double t1 = 0.0;                       // time of the first snapshot
    std::optional<std::size_t> max_rank;   // cap on modes kept by the first reduction

    void validate(std::size_t num_snapshots) const
    {
        if (d < 1) {
            throw InputError("delay index d must be >= 1");
        }
        if (d >= num_snapshots) {
            throw InputError("delay index exceeds snapshot count");
        }
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw InputError("time step dt must be positive");
        }
        if (!std::isfinite(t1)) {
            throw InputError("start time t1 must be finite");
        }
        for (double eps : {eps_svd, eps_dmd}) {
            if (!(eps >= 0.0 && eps < 1.0)) {
                throw InputError("tolerances must lie in [0, 1)");
            }
        }
        if (max_rank && *max_rank < 1) {
            throw InputError("max_rank must be >= 1 when given");
        }
    }
};

struct DmdMode {
    ComplexVector spatial;   // unit norm, phase of the fitted coefficient folded in
    ComplexVector reduced;   // coordinates of `spatial` in the reduction basis
    double amplitude = 0.0;  // a_m >= 0
    double growth_rate = 0.0;  // delta_m, 1/s
    double frequency = 0.0;    // omega_m, rad/s
    Complex eigenvalue{0.0, 0.0};  // mu_m = exp((delta_m + i omega_m) dt)
};

struct DmdExpansion {
    std::vector<DmdMode> modes;  // amplitude nonincreasing
    double dt = 0.0;
    double t1 = 0.0;
    std::size_t num_snapshots = 0;
    std::size_t state_dim = 0;   // J, length of every spatial mode
};

struct ReconstructionReport {
    double rrmse = 0.0;
    std::size_t retained_spatial_rank = 0;   // N
    std::size_t retained_temporal_rank = 0;  // N'
    std::size_t num_modes = 0;               // M
};

inline std::vector<double> snapshot_times(std::size_t count, double dt, double t1 = 0.0)
{
    std::vector<double> t(count);
    for (std::size_t k = 0; k < count; ++k) {
        t[k] = t1 + static_cast<double>(k) * dt;
    }
    return t;
}

// ---------------------------------------------------------------------------
// Step 1: first reduction

struct ReducedSnapshots {
    RealMatrix basis;    // J x N, orthonormal columns
    RealMatrix reduced;  // N x K, Sigma * T^T
};

inline ReducedSnapshots reduce_snapshots(const RealMatrix& v, double eps_svd, std::size_t max_rank = 0)
{
    require_finite(v, "reduce_snapshots");
    if (v.cols() < 2) {
        throw InputError("reduce_snapshots: at least two snapshots are required");
    }
    TruncatedSVD svd = truncated_svd(v, eps_svd, CutRule::drop_at_or_below, max_rank);
    ReducedSnapshots out;
    out.reduced = svd.singular_values.asDiagonal() * svd.right.transpose();
    out.basis = std::move(svd.left);
    return out;
}

// ---------------------------------------------------------------------------
// Step 2: delay embedding and second reduction

/// d-fold delay embedding over the full window: block i (i = 0..d-1) holds
/// reduced columns i .. i+K-d, giving (d*N) x (K-d+1).
inline RealMatrix delay_embed(const RealMatrix& reduced, std::size_t d)
{
    const auto k = static_cast<std::size_t>(reduced.cols());
    if (d < 1) {
        throw InputError("delay index d must be >= 1");
    }
    if (d >= k) {
        throw InputError("delay index exceeds snapshot count");
    }
    const Eigen::Index n = reduced.rows();
    const auto width = static_cast<Eigen::Index>(k - d + 1);
    RealMatrix out(n * static_cast<Eigen::Index>(d), width);
    for (std::size_t i = 0; i < d; ++i) {
        out.middleRows(static_cast<Eigen::Index>(i) * n, n) =
            reduced.middleCols(static_cast<Eigen::Index>(i), width);
    }
    return out;
}

struct StackedSnapshots {
    RealMatrix lagged;    // (d*N) x (K-d)
    RealMatrix advanced;  // (d*N) x (K-d), lagged shifted one step forward
};

inline StackedSnapshots build_stacked(const RealMatrix& reduced, std::size_t d)
{
    const RealMatrix full = delay_embed(reduced, d);
    const Eigen::Index cols = full.cols() - 1;
    return {full.leftCols(cols), full.rightCols(cols)};
}

struct SecondReduction {
    RealMatrix basis;      // (d*N) x N', orthonormal columns
    RealMatrix projected;  // N' x (K-d+1)
};

// Retains N' per sigma_{N'+1}/sigma_1 < eps_svd (strict, unlike the first step).
inline SecondReduction second_reduction(const RealMatrix& lagged_full, double eps_svd)
{
    TruncatedSVD svd = truncated_svd(lagged_full, eps_svd, CutRule::drop_below);
    SecondReduction out;
    out.projected = svd.singular_values.asDiagonal() * svd.right.transpose();
    out.basis = std::move(svd.left);
    return out;
}

// ---------------------------------------------------------------------------
// Step 3: Koopman regression and eigen-extraction

/// Least-squares Koopman matrix R with advanced ~ R * lagged, through the SVD
/// lagged = U L V^T: R = advanced * V * L^-1 * U^T. Singular values with
/// l_i / l_1 <= pinv_eps are not inverted.
inline RealMatrix koopman_matrix(const RealMatrix& lagged, const RealMatrix& advanced, double pinv_eps,
                                 Warnings* warnings = nullptr)
{
    if (lagged.rows() != advanced.rows() || lagged.cols() != advanced.cols()) {
        throw InputError("koopman_matrix: lagged and advanced must share shape");
    }
    require_finite(lagged, "koopman_matrix");
    require_finite(advanced, "koopman_matrix");
    if (lagged.cols() < lagged.rows()) {
        warn(warnings, "koopman_matrix: fewer snapshot pairs (" + std::to_string(lagged.cols()) +
                           ") than retained modes (" + std::to_string(lagged.rows()) +
                           "); regression is underdetermined");
    }
    TruncatedSVD svd;
    try {
        svd = truncated_svd(lagged, pinv_eps);
    } catch (const NumericalError&) {
        throw NumericalError("koopman_matrix: lagged snapshot matrix is numerically zero");
    }
    const RealVector inv = svd.singular_values.cwiseInverse();
    return advanced * svd.right * inv.asDiagonal() * svd.left.transpose();
}

namespace detail {

// Rotate so the largest-magnitude entry (first one on ties) is real positive.
inline Complex phase_to_real_positive(const ComplexVector& v)
{
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > best) {
            best = a;
            arg = i;
        }
    }
    if (best <= 0.0) {
        return {1.0, 0.0};
    }
    return std::conj(v(arg)) / best;
}

} // namespace detail

/// Eigenpairs of the Koopman matrix mapped back to modes.
///
/// delta + i omega = log(mu) / dt on the principal branch, so |omega| <= pi/dt.
/// The reduced mode is the first `spatial_rank` entries of basis2 * q, the full
/// mode is basis1 * reduced; both are scaled so the full mode has unit norm and
/// its largest-magnitude entry is real positive. Amplitudes are left at zero.
inline std::vector<DmdMode> eigen_to_modes(const RealMatrix& koopman, const RealMatrix& basis2,
                                           const RealMatrix& basis1, double dt,
                                           std::size_t spatial_rank, Warnings* warnings = nullptr)
{
    if (koopman.rows() != koopman.cols()) {
        throw InputError("eigen_to_modes: Koopman matrix must be square");
    }
    if (basis2.cols() != koopman.rows()) {
        throw InputError("eigen_to_modes: second basis does not match Koopman size");
    }
    const auto n = static_cast<Eigen::Index>(spatial_rank);
    if (n < 1 || n > basis2.rows() || basis1.cols() != n) {
        throw InputError("eigen_to_modes: spatial rank does not match the bases");
    }
    if (!(dt > 0.0)) {
        throw InputError("eigen_to_modes: dt must be positive");
    }

    Eigen::EigenSolver<RealMatrix> es(koopman, true);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigen_to_modes: eigen-decomposition did not converge");
    }
    const ComplexVector mu = es.eigenvalues();
    const ComplexMatrix q = es.eigenvectors();

    if (q.cols() > 1) {
        Eigen::JacobiSVD<ComplexMatrix> cond(q);
        const auto& s = cond.singularValues();
        if (s(s.size() - 1) <= 1e-12 * s(0)) {
            warn(warnings, "eigen_to_modes: Koopman matrix is numerically defective; "
                           "eigenvectors may be inaccurate");
        }
    }

    const double mu_floor = std::numeric_limits<double>::epsilon() * std::max(1.0, koopman.norm());
    const ComplexMatrix b2 = basis2.cast<Complex>();
    const ComplexMatrix b1 = basis1.cast<Complex>();

    std::vector<DmdMode> modes;
    modes.reserve(static_cast<std::size_t>(mu.size()));
    for (Eigen::Index m = 0; m < mu.size(); ++m) {
        if (std::abs(mu(m)) <= mu_floor) {
            warn(warnings, "eigen_to_modes: discarded a zero eigenvalue");
            continue;
        }
        const ComplexVector lifted = b2 * q.col(m);
        ComplexVector reduced = lifted.head(n);
        if (reduced.norm() <= 1e-14 * lifted.norm()) {
            warn(warnings, "eigen_to_modes: discarded a mode with no component in the spatial basis");
            continue;
        }
        ComplexVector full = b1 * reduced;
        const double scale = full.norm();
        full /= scale;
        reduced /= scale;
        const Complex rot = detail::phase_to_real_positive(full);
        full *= rot;
        reduced *= rot;

        const Complex lambda = std::log(mu(m)) / dt;
        DmdMode mode;
        mode.spatial = std::move(full);
        mode.reduced = std::move(reduced);
        mode.eigenvalue = mu(m);
        mode.growth_rate = lambda.real();
        mode.frequency = lambda.imag();
        modes.push_back(std::move(mode));
    }
    return modes;
}

/// Index of the complex-conjugate partner of each mode (-1 if none). A pair is
/// two eigenvalues with |mu_a - conj(mu_b)| <= tol * max(1, |mu_a|); real
/// eigenvalues never pair.
inline std::vector<std::ptrdiff_t> conjugate_partners(std::span<const DmdMode> modes, double tol = 1e-8)
{
    std::vector<std::ptrdiff_t> partner(modes.size(), -1);
    for (std::size_t a = 0; a < modes.size(); ++a) {
        if (!(modes[a].eigenvalue.imag() > 0.0) || partner[a] >= 0) {
            continue;
        }
        const Complex target = std::conj(modes[a].eigenvalue);
        const double limit = tol * std::max(1.0, std::abs(modes[a].eigenvalue));
        std::ptrdiff_t best = -1;
        double best_dist = limit;
        for (std::size_t b = 0; b < modes.size(); ++b) {
            if (b == a || partner[b] >= 0 || !(modes[b].eigenvalue.imag() < 0.0)) {
                continue;
            }
            const double dist = std::abs(modes[b].eigenvalue - target);
            if (dist <= best_dist) {
                best_dist = dist;
                best = static_cast<std::ptrdiff_t>(b);
            }
        }
        if (best >= 0) {
            partner[a] = best;
            partner[static_cast<std::size_t>(best)] = static_cast<std::ptrdiff_t>(a);
        }
    }
    return partner;
}

// ---------------------------------------------------------------------------
// Step 4: amplitudes, ordering, truncation

enum class FitMethod {
    automatic,         // orthogonal factorization while cheap, normal equations otherwise
    orthogonal,        // column-pivoted QR of the stacked (N*K) x M system
    normal_equations,  // M x M Gram system assembled without the stacked matrix
};

/// Complex coefficients c minimizing sum_k || v_k - sum_m c_m u_m exp((delta_m + i omega_m) k dt) ||^2
/// in the reduced space, over all K reduced snapshots (columns of `reduced`).
/// Columns the factorization finds indeterminate get coefficient zero.
inline std::vector<Complex> fit_amplitudes(const RealMatrix& reduced, std::span<const DmdMode> modes,
                                           double dt, Warnings* warnings = nullptr,
                                           FitMethod method = FitMethod::automatic)
{
    const auto m = static_cast<Eigen::Index>(modes.size());
    if (m == 0) {
        return {};
    }
    const Eigen::Index n = reduced.rows();
    const Eigen::Index k = reduced.cols();
    ComplexMatrix u(n, m);
    ComplexMatrix vand(m, k);
    for (Eigen::Index j = 0; j < m; ++j) {
        const DmdMode& mode = modes[static_cast<std::size_t>(j)];
        if (mode.reduced.size() != n) {
            throw InputError("fit_amplitudes: reduced mode length does not match reduced snapshots");
        }
        u.col(j) = mode.reduced;
        const Complex lambda(mode.growth_rate, mode.frequency);
        for (Eigen::Index t = 0; t < k; ++t) {
            vand(j, t) = std::exp(lambda * (static_cast<double>(t) * dt));
        }
    }

    if (method == FitMethod::automatic) {
        const double cost = static_cast<double>(n) * static_cast<double>(k) * static_cast<double>(m) *
                            static_cast<double>(m);
        method = cost <= 2e7 ? FitMethod::orthogonal : FitMethod::normal_equations;
    }

    ComplexVector c;
    Eigen::Index rank = m;
    if (method == FitMethod::orthogonal) {
        ComplexMatrix system(n * k, m);
        for (Eigen::Index t = 0; t < k; ++t) {
            system.middleRows(t * n, n) = u * vand.col(t).asDiagonal();
        }
        const ComplexVector rhs = Eigen::Map<const RealMatrix>(reduced.data(), n * k, 1).cast<Complex>();
        Eigen::ColPivHouseholderQR<ComplexMatrix> qr(system);
        rank = qr.rank();
        c = qr.solve(rhs);
    } else {
        const ComplexMatrix gram = (u.adjoint() * u).cwiseProduct((vand.conjugate() * vand.transpose()));
        const ComplexMatrix proj = u.adjoint() * reduced.cast<Complex>();
        const ComplexVector rhs = vand.conjugate().cwiseProduct(proj).rowwise().sum();
        Eigen::ColPivHouseholderQR<ComplexMatrix> qr(gram);
        rank = qr.rank();
        c = qr.solve(rhs);
    }
    if (rank < m) {
        warn(warnings, "fit_amplitudes: fit matrix is rank deficient (" + std::to_string(rank) + " of " +
                           std::to_string(m) + "); indeterminate coefficients set to zero");
    }
    if (!c.allFinite()) {
        throw NumericalError("fit_amplitudes: least-squares solution is not finite");
    }
    return {c.data(), c.data() + c.size()};
}

/// Stores a_m = |c_m| and folds the phase of c_m into the mode vectors. Real
/// eigenvalues take a real coefficient; conjugate pairs are made exactly
/// symmetric (shared amplitude, conjugate vectors). Modes are then sorted by
/// amplitude, nonincreasing, ties by frequency then growth rate, descending.
inline void apply_amplitudes(std::vector<DmdMode>& modes, std::span<const Complex> coefficients)
{
    if (coefficients.size() != modes.size()) {
        throw InputError("apply_amplitudes: coefficient count does not match mode count");
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        Complex c = coefficients[i];
        if (modes[i].eigenvalue.imag() == 0.0) {
            c = {c.real(), 0.0};
        }
        const double a = std::abs(c);
        modes[i].amplitude = a;
        if (a > 0.0) {
            const Complex phase = c / a;
            modes[i].spatial *= phase;
            modes[i].reduced *= phase;
        }
    }
    const auto partner = conjugate_partners(modes);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::ptrdiff_t p = partner[i];
        if (p < 0 || !(modes[i].eigenvalue.imag() > 0.0)) {
            continue;
        }
        auto& pos = modes[i];
        auto& neg = modes[static_cast<std::size_t>(p)];
        const double shared = 0.5 * (pos.amplitude + neg.amplitude);
        pos.amplitude = shared;
        neg.amplitude = shared;
        neg.spatial = pos.spatial.conjugate();
        neg.reduced = pos.reduced.conjugate();
    }
    std::stable_sort(modes.begin(), modes.end(), [](const DmdMode& a, const DmdMode& b) {
        if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        return a.growth_rate > b.growth_rate;
    });
}

/// Keeps modes with a_m > 0 and a_m / a_1 >= eps_dmd; a mode sitting exactly
/// on the threshold is kept. Conjugate partners share one decision, taken on
/// the larger amplitude of the pair. Input must be sorted by amplitude.
inline std::vector<DmdMode> truncate_by_amplitude(std::vector<DmdMode> modes, double eps_dmd)
{
    if (modes.empty()) {
        return modes;
    }
    const double a1 = modes.front().amplitude;
    const auto partner = conjugate_partners(modes);
    std::vector<DmdMode> kept;
    kept.reserve(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        double a = modes[i].amplitude;
        if (partner[i] >= 0) {
            a = std::max(a, modes[static_cast<std::size_t>(partner[i])].amplitude);
        }
        if (a > 0.0 && a >= eps_dmd * a1) {
            kept.push_back(std::move(modes[i]));
        }
    }
    return kept;
}

// ---------------------------------------------------------------------------
// Reconstruction and error

/// Column j = sum_m a_m u_m exp((delta_m + i omega_m)(t_j - t1)), complex.
inline ComplexMatrix reconstruct_complex(const DmdExpansion& expansion, std::span<const double> times,
                                         bool zero_growth = false)
{
    const auto j = static_cast<Eigen::Index>(expansion.state_dim);
    const auto t = static_cast<Eigen::Index>(times.size());
    const auto m = static_cast<Eigen::Index>(expansion.modes.size());
    if (m == 0) {
        return ComplexMatrix::Zero(j, t);
    }
    ComplexMatrix u(j, m);
    ComplexMatrix temporal(m, t);
    for (Eigen::Index i = 0; i < m; ++i) {
        const DmdMode& mode = expansion.modes[static_cast<std::size_t>(i)];
        if (mode.spatial.size() != j) {
            throw InputError("reconstruct: spatial mode length does not match state dimension");
        }
        u.col(i) = mode.spatial;
        const Complex lambda(zero_growth ? 0.0 : mode.growth_rate, mode.frequency);
        for (Eigen::Index c = 0; c < t; ++c) {
            const double tau = times[static_cast<std::size_t>(c)] - expansion.t1;
            if (!std::isfinite(tau)) {
                throw InputError("reconstruct: times must be finite");
            }
            temporal(i, c) = mode.amplitude * std::exp(lambda * tau);
        }
    }
    return u * temporal;
}

/// Real part of the expansion at the given times. Warns when the imaginary
/// residual exceeds 1e-8 of the largest real entry (expansion not conjugate-closed).
inline RealMatrix reconstruct(const DmdExpansion& expansion, std::span<const double> times,
                              bool zero_growth = false, Warnings* warnings = nullptr)
{
    const ComplexMatrix full = reconstruct_complex(expansion, times, zero_growth);
    RealMatrix re = full.real();
    if (full.size() > 0) {
        const double imag = full.imag().cwiseAbs().maxCoeff();
        const double scale = re.cwiseAbs().maxCoeff();
        if (imag > 1e-8 * scale && imag > 0.0) {
            warn(warnings, "reconstruct: imaginary residual " + std::to_string(imag) +
                               " exceeds 1e-8 relative; expansion is not conjugate-closed");
        }
    }
    return re;
}

inline double rrmse(const RealMatrix& original, const RealMatrix& reconstructed)
{
    if (original.rows() != reconstructed.rows() || original.cols() != reconstructed.cols()) {
        throw InputError("rrmse: shapes differ");
    }
    const double denom = original.norm();
    if (!(denom > 0.0)) {
        throw NumericalError("rrmse: original data is all zero");
    }
    return (original - reconstructed).norm() / denom;
}

// ---------------------------------------------------------------------------
// Orchestration

/// Steps 2-4 on an already reduced snapshot matrix whose columns are the
/// coordinates of the snapshots in the orthonormal `basis`.
struct ReducedFit {
    std::vector<DmdMode> modes;       // sorted and truncated
    std::size_t temporal_rank = 0;    // N'
};

inline ReducedFit fit_reduced_dynamics(const RealMatrix& reduced, const RealMatrix& basis,
                                       const HodmdConfig& config, Warnings* warnings = nullptr)
{
    const auto k = static_cast<std::size_t>(reduced.cols());
    config.validate(k);
    const RealMatrix full = delay_embed(reduced, config.d);
    const SecondReduction second = second_reduction(full, config.eps_svd);
    const Eigen::Index pairs = full.cols() - 1;
    const RealMatrix koopman = koopman_matrix(second.projected.leftCols(pairs),
                                              second.projected.rightCols(pairs), config.eps_svd, warnings);
    std::vector<DmdMode> modes = eigen_to_modes(koopman, second.basis, basis, config.dt,
                                                static_cast<std::size_t>(reduced.rows()), warnings);
    const std::vector<Complex> c = fit_amplitudes(reduced, modes, config.dt, warnings);
    apply_amplitudes(modes, c);
    return {truncate_by_amplitude(std::move(modes), config.eps_dmd),
            static_cast<std::size_t>(second.basis.cols())};
}

struct HodmdResult {
    DmdExpansion expansion;
    ReconstructionReport report;
    RealMatrix reconstruction;  // J x K at the sample times
    Warnings warnings;
};

/// Full DMD-d run on a J x K snapshot matrix.
inline HodmdResult run_hodmd(const RealMatrix& v, const HodmdConfig& config, bool zero_growth = false)
{
    require_finite(v, "run_hodmd");
    const auto k = static_cast<std::size_t>(v.cols());
    if (k < 2) {
        throw InputError("run_hodmd: at least two snapshots are required");
    }
    config.validate(k);

    HodmdResult out;
    const ReducedSnapshots first = reduce_snapshots(v, config.eps_svd, config.max_rank.value_or(0));
    ReducedFit fit = fit_reduced_dynamics(first.reduced, first.basis, config, &out.warnings);

    out.expansion.modes = std::move(fit.modes);
    out.expansion.dt = config.dt;
    out.expansion.t1 = config.t1;
    out.expansion.num_snapshots = k;
    out.expansion.state_dim = static_cast<std::size_t>(v.rows());

    const auto times = snapshot_times(k, config.dt, config.t1);
    out.reconstruction = reconstruct(out.expansion, times, zero_growth, &out.warnings);
    out.report.rrmse = rrmse(v, out.reconstruction);
    out.report.retained_spatial_rank = static_cast<std::size_t>(first.basis.cols());
    out.report.retained_temporal_rank = fit.temporal_rank;
    out.report.num_modes = out.expansion.modes.size();
    return out;
}

// ---------------------------------------------------------------------------
// Delay-index calibration

struct CalibrationRow {
    std::size_t d = 0;
    std::size_t spatial_rank = 0;
    std::size_t temporal_rank = 0;
    std::size_t num_modes = 0;
    double rrmse = 0.0;
};

struct CalibrationResult {
    std::size_t best_d = 0;
    std::vector<CalibrationRow> rows;  // in candidate order
};

/// round(K/10) .. round(4K/10) in steps of round(K/20), clipped to [1, K-1].
inline std::vector<std::size_t> default_d_candidates(std::size_t num_snapshots)
{
    const auto round_frac = [&](double f) {
        return static_cast<std::size_t>(std::llround(f * static_cast<double>(num_snapshots)));
    };
    const std::size_t hi_limit = num_snapshots > 1 ? num_snapshots - 1 : 1;
    const std::size_t lo = std::clamp<std::size_t>(round_frac(0.1), 1, hi_limit);
    const std::size_t hi = std::clamp<std::size_t>(round_frac(0.4), lo, hi_limit);
    const std::size_t step = std::max<std::size_t>(1, round_frac(0.05));
    std::vector<std::size_t> out;
    for (std::size_t d = lo; d <= hi; d += step) {
        out.push_back(d);
    }
    return out;
}

/// Runs the pipeline for every candidate d and picks the smallest RRMSE.
/// Values within 1e-10 + 1e-9 * best of the current best count as ties and
/// keep the smaller d.
inline CalibrationResult calibrate_d(const RealMatrix& v, const HodmdConfig& config,
                                     std::span<const std::size_t> candidates)
{
    if (candidates.empty()) {
        throw InputError("calibrate_d: candidate list is empty");
    }
    for (std::size_t d : candidates) {
        HodmdConfig c = config;
        c.d = d;
        c.validate(static_cast<std::size_t>(v.cols()));
    }
    CalibrationResult out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t d : candidates) {
        HodmdConfig c = config;
        c.d = d;
        const HodmdResult r = run_hodmd(v, c);
        out.rows.push_back({d, r.report.retained_spatial_rank, r.report.retained_temporal_rank,
                            r.report.num_modes, r.report.rrmse});
        const double slack = 1e-10 + 1e-9 * (std::isfinite(best) ? best : 0.0);
        const bool better = !std::isfinite(best) || r.report.rrmse < best - slack;
        const bool tie_smaller = std::abs(r.report.rrmse - best) <= slack && d < out.best_d;
        if (better || tie_smaller) {
            best = std::min(best, r.report.rrmse);
            out.best_d = d;
        }
    }
    return out;
}

} // namespace hodmd
