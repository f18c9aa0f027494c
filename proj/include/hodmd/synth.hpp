#pragma once

// Ground-truth signal generators and spectrum matching used by tests, the
// acceptance suite and the `synth` / `compare` CLI commands.

#include "hodmd/dmd.hpp"
#include "hodmd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <tuple>
#include <vector>

namespace hodmd {

/// One term a * u * exp((delta + i omega) t) of a synthetic expansion.
///
/// A spec with omega != 0 is emitted together with its complex conjugate so the
/// data stay real; DMD then recovers two modes of amplitude `amplitude` each.
/// A spec with omega == 0 contributes a * Re(exp(i phase) u) * exp(delta t).
struct ModeSpec {
    double amplitude = 1.0;
    double frequency = 0.0;    // rad/s
    double growth_rate = 0.0;  // 1/s
    double phase = 0.0;        // rad
    std::optional<ComplexVector> spatial;  // normalized on use; drawn from the seed when empty
};

namespace detail {

inline std::size_t random_slots(std::span<const ModeSpec> specs)
{
    std::size_t n = 0;
    for (const auto& s : specs) {
        if (!s.spatial) {
            n += s.frequency == 0.0 ? 1 : 2;
        }
    }
    return n;
}

// Orthonormalize columns when possible, otherwise just normalize them.
inline RealMatrix orthonormal_columns(const RealMatrix& raw)
{
    if (raw.cols() == 0) {
        return raw;
    }
    if (raw.cols() <= raw.rows()) {
        Eigen::HouseholderQR<RealMatrix> qr(raw);
        return qr.householderQ() * RealMatrix::Identity(raw.rows(), raw.cols());
    }
    RealMatrix out = raw;
    out.colwise().normalize();
    return out;
}

inline RealMatrix synthesize(std::span<const ModeSpec> specs, const RealMatrix& random_vectors,
                             std::size_t j, std::size_t k, double dt)
{
    const auto rows = static_cast<Eigen::Index>(j);
    RealMatrix out = RealMatrix::Zero(rows, static_cast<Eigen::Index>(k));
    Eigen::Index slot = 0;
    for (const auto& s : specs) {
        if (s.amplitude < 0.0) {
            throw InputError("ModeSpec: amplitude must be nonnegative");
        }
        ComplexVector u;
        if (s.spatial) {
            if (s.spatial->size() != rows) {
                throw InputError("ModeSpec: explicit spatial vector has wrong length");
            }
            const double norm = s.spatial->norm();
            if (!(norm > 0.0)) {
                throw InputError("ModeSpec: explicit spatial vector is zero");
            }
            u = *s.spatial / norm;
        } else if (s.frequency == 0.0) {
            u = random_vectors.col(slot++).cast<Complex>();
        } else {
            u = (random_vectors.col(slot).cast<Complex>() +
                 Complex(0.0, 1.0) * random_vectors.col(slot + 1).cast<Complex>()) /
                std::numbers::sqrt2;
            slot += 2;
        }
        const ComplexVector weighted = s.amplitude * std::polar(1.0, s.phase) * u;
        const Complex lambda(s.growth_rate, s.frequency);
        const double factor = s.frequency == 0.0 ? 1.0 : 2.0;
        for (std::size_t t = 0; t < k; ++t) {
            const Complex e = std::exp(lambda * (static_cast<double>(t) * dt));
            out.col(static_cast<Eigen::Index>(t)) += factor * (weighted * e).real();
        }
    }
    return out;
}

} // namespace detail

/// Real J x K snapshot matrix sampled at t_k = k * dt, k = 0..K-1. Spatial
/// vectors not given explicitly are drawn from a Gaussian with `seed` and
/// orthonormalized together (two per oscillating spec, u = (p + i q)/sqrt(2)).
inline RealMatrix synth_matrix(std::span<const ModeSpec> specs, std::size_t j, std::size_t k, double dt,
                               std::uint64_t seed)
{
    if (j < 1 || k < 1) {
        throw InputError("synth_matrix: J and K must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    RealMatrix raw(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(detail::random_slots(specs)));
    for (Eigen::Index c = 0; c < raw.cols(); ++c)
        for (Eigen::Index r = 0; r < raw.rows(); ++r)
            raw(r, c) = gauss(rng);
    return detail::synthesize(specs, detail::orthonormal_columns(raw), j, k, dt);
}

/// `count` smooth random I1 x I2 fields (flattened i1-fastest), each a random
/// cosine series with wavenumbers below 4 in both directions, orthonormalized.
inline RealMatrix smooth_fields(std::size_t i1, std::size_t i2, std::size_t count, std::uint64_t seed)
{
    constexpr int waves = 4;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    RealMatrix raw = RealMatrix::Zero(static_cast<Eigen::Index>(i1 * i2), static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c) {
        for (int kx = 0; kx < waves; ++kx) {
            for (int ky = 0; ky < waves; ++ky) {
                const double g = gauss(rng) / (1.0 + kx * kx + ky * ky);
                const double px = angle(rng);
                const double py = angle(rng);
                for (std::size_t b = 0; b < i2; ++b) {
                    const double cy = std::cos(std::numbers::pi * ky * (static_cast<double>(b) + 0.5) /
                                                   static_cast<double>(i2) + py);
                    for (std::size_t a = 0; a < i1; ++a) {
                        const double cx = std::cos(std::numbers::pi * kx * (static_cast<double>(a) + 0.5) /
                                                       static_cast<double>(i1) + px);
                        raw(static_cast<Eigen::Index>(a + i1 * b), static_cast<Eigen::Index>(c)) += g * cx * cy;
                    }
                }
            }
        }
    }
    return detail::orthonormal_columns(raw);
}

/// Video analogue of synth_matrix with smooth spatial fields.
inline Order3Tensor synth_video(std::span<const ModeSpec> specs, std::size_t i1, std::size_t i2,
                                std::size_t k, double dt, std::uint64_t seed)
{
    if (i1 < 1 || i2 < 1 || k < 1) {
        throw InputError("synth_video: dims must be >= 1");
    }
    const RealMatrix fields = smooth_fields(i1, i2, detail::random_slots(specs), seed);
    Order3Tensor out({i1, i2, k});
    out.as_matrix() = detail::synthesize(specs, fields, i1 * i2, k, dt);
    return out;
}

/// Adds i.i.d. N(0, sigma^2) noise, deterministic per seed.
inline RealMatrix add_noise(const RealMatrix& data, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0)) {
        throw InputError("add_noise: sigma must be nonnegative");
    }
    if (sigma == 0.0) {
        return data;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    RealMatrix out = data;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.data()[i] += gauss(rng);
    }
    return out;
}

inline Order3Tensor add_noise(const Order3Tensor& data, double sigma, std::uint64_t seed)
{
    Order3Tensor out = data;
    out.as_matrix() = add_noise(RealMatrix(data.as_matrix()), sigma, seed);
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum matching

struct ModeMatch {
    std::size_t truth_index = 0;
    std::size_t recovered_index = 0;  // into recovered.modes
    double truth_frequency = 0.0;     // |omega| of the truth spec
    double d_omega = 0.0;             // |omega_rec - |omega_true||
    double d_delta = 0.0;
    double amplitude_rel_error = 0.0;
};

struct MatchReport {
    std::vector<ModeMatch> pairs;                 // sorted by truth frequency
    std::vector<std::size_t> unmatched_truth;
    std::vector<std::size_t> unmatched_recovered;  // omega >= 0 modes above the noise floor
    std::vector<std::size_t> noise_floor;          // omega >= 0 modes below 1e-3 a_1

    bool all_truth_matched() const { return unmatched_truth.empty(); }

    double max_d_omega() const
    {
        double m = 0.0;
        for (const auto& p : pairs) m = std::max(m, p.d_omega);
        return m;
    }
};

/// Greedy injective matching on frequency: candidate pairs (truth, recovered
/// omega >= 0 representative) within tol_omega are accepted in order of
/// increasing |d_omega|. Tightening tol_omega only removes pairs from the end
/// of that order, so a pass at a tight tolerance implies a pass at any looser one.
inline MatchReport match_spectra(std::span<const ModeSpec> truth, const DmdExpansion& recovered,
                                 double tol_omega)
{
    if (!(tol_omega > 0.0)) {
        throw InputError("match_spectra: tol_omega must be positive");
    }
    std::vector<std::size_t> reps;
    for (std::size_t r = 0; r < recovered.modes.size(); ++r) {
        if (recovered.modes[r].frequency >= 0.0) {
            reps.push_back(r);
        }
    }
    struct Candidate {
        double dist;
        double truth_omega;
        std::size_t t;
        std::size_t r;
    };
    std::vector<Candidate> cands;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        const double w = std::abs(truth[t].frequency);
        for (std::size_t r : reps) {
            const double dist = std::abs(recovered.modes[r].frequency - w);
            if (dist <= tol_omega) {
                cands.push_back({dist, w, t, r});
            }
        }
    }
    // Ties resolve on truth frequency before index so the result does not
    // depend on the order of `truth`.
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
        return std::tie(a.dist, a.truth_omega, truth[a.t].growth_rate, truth[a.t].amplitude, a.r) <
               std::tie(b.dist, b.truth_omega, truth[b.t].growth_rate, truth[b.t].amplitude, b.r);
    });

    std::vector<bool> used_t(truth.size(), false);
    std::vector<bool> used_r(recovered.modes.size(), false);
    MatchReport out;
    for (const auto& c : cands) {
        if (used_t[c.t] || used_r[c.r]) {
            continue;
        }
        used_t[c.t] = true;
        used_r[c.r] = true;
        const ModeSpec& s = truth[c.t];
        const DmdMode& m = recovered.modes[c.r];
        ModeMatch mm;
        mm.truth_index = c.t;
        mm.recovered_index = c.r;
        mm.truth_frequency = c.truth_omega;
        mm.d_omega = c.dist;
        mm.d_delta = std::abs(m.growth_rate - s.growth_rate);
        mm.amplitude_rel_error = s.amplitude > 0.0 ? std::abs(m.amplitude - s.amplitude) / s.amplitude
                                                   : std::abs(m.amplitude);
        out.pairs.push_back(mm);
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const ModeMatch& a, const ModeMatch& b) {
        return std::tie(a.truth_frequency, a.recovered_index) < std::tie(b.truth_frequency, b.recovered_index);
    });
    for (std::size_t t = 0; t < truth.size(); ++t) {
        if (!used_t[t]) out.unmatched_truth.push_back(t);
    }
    const double a1 = recovered.modes.empty() ? 0.0 : recovered.modes.front().amplitude;
    for (std::size_t r : reps) {
        if (used_r[r]) continue;
        if (recovered.modes[r].amplitude < 1e-3 * a1) {
            out.noise_floor.push_back(r);
        } else {
            out.unmatched_recovered.push_back(r);
        }
    }
    return out;
}

} // namespace hodmd
