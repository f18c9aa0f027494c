#pragma once

#include "hodmd/linalg.hpp"

#include <array>

namespace hodmd {

/// Truncated Tucker decomposition T ~ tprod(core, factor1, factor2, temporal_factor).
struct HOSVDResult {
    Order3Tensor core;           // P1 x P2 x N
    RealMatrix factor1;          // I1 x P1
    RealMatrix factor2;          // I2 x P2
    RealMatrix temporal_factor;  // K x N
    std::array<RealVector, 3> singular_values_per_mode;  // retained values per mode

    std::array<std::size_t, 3> ranks() const
    {
        return {static_cast<std::size_t>(factor1.cols()), static_cast<std::size_t>(factor2.cols()),
                static_cast<std::size_t>(temporal_factor.cols())};
    }
};

// Each factor holds the retained left singular vectors of the mode unfolding,
// modes 1 and 2 cut by eps_spatial and mode 3 by eps_temporal. The core is the
// projection of T onto the three factors. No HOOI refinement.
inline HOSVDResult hosvd(const Order3Tensor& t, double eps_spatial, double eps_temporal)
{
    if (!(eps_spatial >= 0.0 && eps_spatial < 1.0) || !(eps_temporal >= 0.0 && eps_temporal < 1.0)) {
        throw InputError("hosvd: tolerances must lie in [0, 1)");
    }
    HOSVDResult r;
    std::array<RealMatrix*, 3> factors{&r.factor1, &r.factor2, &r.temporal_factor};
    for (int mode = 1; mode <= 3; ++mode) {
        const double eps = mode == 3 ? eps_temporal : eps_spatial;
        TruncatedSVD svd = truncated_svd(unfold(t, mode), eps);
        *factors[static_cast<std::size_t>(mode - 1)] = std::move(svd.left);
        r.singular_values_per_mode[static_cast<std::size_t>(mode - 1)] = std::move(svd.singular_values);
    }
    r.core = tprod(t, r.factor1.transpose(), r.factor2.transpose(), r.temporal_factor.transpose());
    return r;
}

inline Order3Tensor reconstruct_hosvd(const HOSVDResult& r)
{
    return tprod(r.core, r.factor1, r.factor2, r.temporal_factor);
}

} // namespace hodmd
