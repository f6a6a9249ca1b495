// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/bench.hpp"

#include "ctcseg/greedy.hpp"
#include "ctcseg/io.hpp"
#include "ctcseg/segmenter.hpp"

#include <algorithm>
#include <sstream>

namespace ctcseg {

double real_time_factor(double processing_sec, double audio_duration_sec) {
    if (!(audio_duration_sec > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "audio duration must be positive");
    }
    return processing_sec / audio_duration_sec;
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorKind::InvalidArgument, "median of nothing");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

void finalize(BenchResult& result) {
    result.median_rtf = median(result.rtf_samples);
    const double seconds = result.median_rtf * result.audio_sec;
    result.frames_per_sec = seconds > 0.0 ? static_cast<double>(result.num_frames) / seconds : 0.0;
}

void check_repeat(int repeat) {
    if (repeat < 1) throw Error(ErrorKind::InvalidArgument, "repeat must be >= 1");
}

}  // namespace

BenchResult bench_core(const PosteriorStream& stream, SegmenterConfig cfg, int repeat) {
    check_repeat(repeat);
    if (stream.num_frames() == 0) throw Error(ErrorKind::EmptyStream, "nothing to benchmark");
    cfg.blank_id = stream.blank_id;
    cfg.subsample_factor = stream.subsample_factor;

    BenchResult result;
    result.audio_sec = stream.duration_sec();
    result.num_frames = stream.num_frames();
    for (int i = 0; i < repeat; ++i) {
        std::size_t count = 0;
        result.rtf_samples.push_back(measure_rtf(
            [&] {
                const LabelStream labels = greedy_decode(stream);
                count = segment_offline(labels, cfg, stream.feature_frames()).size();
            },
            result.audio_sec));
        result.num_segments = static_cast<std::int64_t>(count);
    }
    finalize(result);
    return result;
}

BenchResult bench_end_to_end(const std::filesystem::path& ctcp_path, SegmenterConfig cfg, int repeat) {
    check_repeat(repeat);
    BenchResult result;
    for (int i = 0; i < repeat; ++i) {
        double audio_sec = 0.0;
        std::int64_t frames = 0;
        std::size_t count = 0;
        const auto begin = std::chrono::steady_clock::now();
        {
            const PosteriorStream stream = read_posterior_file(ctcp_path);
            if (stream.num_frames() == 0) throw Error(ErrorKind::EmptyStream, "nothing to benchmark");
            audio_sec = stream.duration_sec();
            frames = stream.num_frames();
            cfg.blank_id = stream.blank_id;
            cfg.subsample_factor = stream.subsample_factor;
            const LabelStream labels = greedy_decode(stream);
            const auto segments =
                apply_min_length_filter(segment_offline(labels, cfg, stream.feature_frames()), cfg);
            std::ostringstream sink;
            write_segments(sink, segments, SegmentFormat::Jsonl, stream.frame_shift_ms);
            count = segments.size();
        }
        const auto end = std::chrono::steady_clock::now();
        result.rtf_samples.push_back(
            real_time_factor(std::chrono::duration<double>(end - begin).count(), audio_sec));
        result.audio_sec = audio_sec;
        result.num_frames = frames;
        result.num_segments = static_cast<std::int64_t>(count);
    }
    finalize(result);
    return result;
}

}  // namespace ctcseg
