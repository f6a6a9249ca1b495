// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ctcseg/core.hpp"

#include <chrono>
#include <filesystem>
#include <utility>
#include <vector>

namespace ctcseg {

/// Processing time divided by audio duration.
double real_time_factor(double processing_sec, double audio_duration_sec);

/// Runs work once and returns its wall-clock RTF against audio_duration_sec.
template <typename Work>
double measure_rtf(Work&& work, double audio_duration_sec) {
    const auto begin = std::chrono::steady_clock::now();
    std::forward<Work>(work)();
    const auto end = std::chrono::steady_clock::now();
    return real_time_factor(std::chrono::duration<double>(end - begin).count(), audio_duration_sec);
}

double median(std::vector<double> values);

enum class RtfMode {
    /// greedy decoding + offline segmentation on an in-memory stream
    Core,
    /// file read + decoding + segmentation + length filter + jsonl formatting
    EndToEnd,
};

struct BenchResult {
    std::vector<double> rtf_samples;
    double median_rtf = 0.0;
    /// Posterior frames (subsampled steps) per wall-clock second at the median.
    double frames_per_sec = 0.0;
    double audio_sec = 0.0;
    std::int64_t num_frames = 0;
    std::int64_t num_segments = 0;
};

/// cfg.blank_id and cfg.subsample_factor are taken from the stream.
BenchResult bench_core(const PosteriorStream& stream, SegmenterConfig cfg, int repeat);
BenchResult bench_end_to_end(const std::filesystem::path& ctcp_path, SegmenterConfig cfg, int repeat);

}  // namespace ctcseg
