#pragma once

#include "hodmd/errors.hpp"
#include "hodmd/linalg.hpp"
#include "hodmd/hosvd.hpp"
#include "hodmd/dmd.hpp"
#include "hodmd/multidim.hpp"
#include "hodmd/synth.hpp"
#include "hodmd/frames_io.hpp"

namespace hodmd {

inline constexpr const char* kVersion = "0.1.0";

} // namespace hodmd
