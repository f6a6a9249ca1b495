// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ctcseg/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ctcseg {

/// Short-time energy baseline: a frame is speech when its mean-square
/// amplitude (samples scaled to [-1, 1)) exceeds the threshold, and speech is
/// held for hangover_frames after the last loud frame.
struct EnergyVadConfig {
    double frame_ms = 10.0;
    double threshold = 1e-3;
    std::int64_t hangover_frames = 5;
};

/// Mean-square energy of each non-overlapping frame; a trailing partial frame
/// is averaged over the samples it has.
std::vector<double> frame_energies(std::span<const std::int16_t> samples, int sample_rate_hz,
                                   double frame_ms);

/// Segments in 1-based frame units; k_* mirror t_* since there is no subsampling.
std::vector<Segment> energy_vad(std::span<const std::int16_t> samples, int sample_rate_hz,
                                const EnergyVadConfig& cfg);

}  // namespace ctcseg
