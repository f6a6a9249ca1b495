// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ctcseg/core.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ctcseg {

/// Ground-truth speech regions for one recording.
struct ReferenceAnnotation {
    std::vector<std::pair<double, double>> speech_regions;
    double total_duration_sec = 0.0;
    std::int64_t label_alphabet_size = 32;

    /// Throws InvalidAnnotation unless regions are sorted, non-overlapping and
    /// inside [0, total_duration_sec].
    void validate() const;
};

/// Inclusive 1-based feature-frame range [first, last] whose frame times
/// t * shift lie in [start_sec, end_sec]. first > last when the region holds
/// no frame.
std::pair<std::int64_t, std::int64_t> region_to_feature_frames(double start_sec, double end_sec,
                                                               double frame_shift_ms);

/// Number of whole feature frames in a recording of the given length.
std::int64_t duration_to_feature_frames(double duration_sec, double frame_shift_ms);

struct SynthesisOptions {
    /// Each spike is displaced by a uniform draw from [-jitter_steps, jitter_steps].
    std::int64_t jitter_steps = 0;
    /// Largest blank gap between spikes inside a speech region; must be < V.
    std::int64_t spike_gap_max = 4;
    std::uint64_t seed = 0;
    double frame_shift_ms = 10.0;
    ScoreKind kind = ScoreKind::Probabilities;
};

struct RandomAnnotationOptions {
    double min_speech_sec = 1.0;
    double max_speech_sec = 6.0;
    double min_pause_sec = 0.8;
    double max_pause_sec = 3.0;
};

/// Alternating pauses and speech regions filling duration_sec.
ReferenceAnnotation make_random_annotation(double duration_sec, std::int64_t num_labels, std::uint64_t seed,
                                           const RandomAnnotationOptions& opts = {});

/// Builds a CTC-like posterior stream for the annotation: sparse non-blank
/// spikes inside speech regions, blank-dominated frames elsewhere. The
/// stream has floor(T / r) steps where T = duration / frame shift.
/// Deterministic for a fixed seed.
PosteriorStream synthesize_posteriors(const ReferenceAnnotation& ref, const SegmenterConfig& cfg,
                                      const SynthesisOptions& opts);

/// Noise-like PCM16 audio that is loud inside the speech regions and quiet
/// elsewhere, for exercising the energy baseline on the same annotation.
std::vector<std::int16_t> synthesize_audio(const ReferenceAnnotation& ref, int sample_rate_hz,
                                           std::uint64_t seed);

}  // namespace ctcseg
