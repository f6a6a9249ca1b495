// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ctcseg/core.hpp"
#include "ctcseg/simulate.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ctcseg {

struct EvalReport {
    double frame_precision = 0.0;
    double frame_recall = 0.0;
    double frame_f1 = 0.0;
    /// Mean absolute start/end error over greedily matched segment pairs.
    double boundary_mae_frames = 0.0;
    std::int64_t n_hyp_segments = 0;
    std::int64_t n_ref_segments = 0;
    std::int64_t n_matched = 0;
    double rtf = 0.0;
};

/// Reference regions converted to feature-frame segments clipped to [1, total_frames].
std::vector<Segment> reference_segments(const ReferenceAnnotation& ref, double frame_shift_ms,
                                        std::int64_t total_frames);

/// Frame-level precision/recall/F1 of hyp against ref. A ratio with an empty
/// denominator is 1.0 when the other set is empty too, else 0.0.
EvalReport evaluate(std::span<const Segment> hyp, std::span<const Segment> ref, std::int64_t total_frames);

EvalReport evaluate(std::span<const Segment> hyp, const ReferenceAnnotation& ref, double frame_shift_ms,
                    std::int64_t total_frames);

}  // namespace ctcseg
