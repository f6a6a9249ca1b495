// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace ctcseg {

namespace {

constexpr double kIndexEps = 1e-9;

struct Spike {
    std::int64_t step;
    std::int64_t length;
    LabelId label;
};

}  // namespace

void ReferenceAnnotation::validate() const {
    if (!(total_duration_sec >= 0.0) || !std::isfinite(total_duration_sec)) {
        throw Error(ErrorKind::InvalidAnnotation, "duration must be a non-negative number");
    }
    if (label_alphabet_size < 2) {
        throw Error(ErrorKind::InvalidAnnotation, "label alphabet needs blank plus one label");
    }
    double prev_end = 0.0;
    for (std::size_t i = 0; i < speech_regions.size(); ++i) {
        const auto [start, end] = speech_regions[i];
        const std::string where = "region " + std::to_string(i);
        if (!std::isfinite(start) || !std::isfinite(end) || start > end) {
            throw Error(ErrorKind::InvalidAnnotation, where + " has start > end");
        }
        if (start < 0.0 || end > total_duration_sec) {
            throw Error(ErrorKind::InvalidAnnotation, where + " lies outside [0, duration]");
        }
        if (i > 0 && start <= prev_end) {
            throw Error(ErrorKind::InvalidAnnotation, where + " overlaps or precedes the previous one");
        }
        prev_end = end;
    }
}

std::pair<std::int64_t, std::int64_t> region_to_feature_frames(double start_sec, double end_sec,
                                                               double frame_shift_ms) {
    const double first = std::ceil(start_sec * 1000.0 / frame_shift_ms - kIndexEps);
    const double last = std::floor(end_sec * 1000.0 / frame_shift_ms + kIndexEps);
    return {std::max<std::int64_t>(1, static_cast<std::int64_t>(first)), static_cast<std::int64_t>(last)};
}

std::int64_t duration_to_feature_frames(double duration_sec, double frame_shift_ms) {
    return static_cast<std::int64_t>(std::floor(duration_sec * 1000.0 / frame_shift_ms + kIndexEps));
}

ReferenceAnnotation make_random_annotation(double duration_sec, std::int64_t num_labels, std::uint64_t seed,
                                           const RandomAnnotationOptions& opts) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> speech(opts.min_speech_sec, opts.max_speech_sec);
    std::uniform_real_distribution<double> pause(opts.min_pause_sec, opts.max_pause_sec);
    ReferenceAnnotation ref;
    ref.total_duration_sec = duration_sec;
    ref.label_alphabet_size = num_labels;
    double t = pause(rng);
    while (true) {
        const double end = t + speech(rng);
        if (end >= duration_sec) break;
        ref.speech_regions.emplace_back(t, end);
        t = end + pause(rng);
    }
    return ref;
}

PosteriorStream synthesize_posteriors(const ReferenceAnnotation& ref, const SegmenterConfig& cfg,
                                      const SynthesisOptions& opts) {
    ref.validate();
    cfg.validate_for(ref.label_alphabet_size);
    if (opts.spike_gap_max < 1 || opts.spike_gap_max >= cfg.v_threshold) {
        throw Error(ErrorKind::InvalidConfig, "spike_gap_max must lie in [1, V)");
    }
    if (opts.jitter_steps < 0) throw Error(ErrorKind::InvalidConfig, "jitter_steps must be >= 0");
    if (!(opts.frame_shift_ms > 0.0)) throw Error(ErrorKind::InvalidConfig, "frame shift must be positive");

    const std::int64_t r = cfg.subsample_factor;
    const std::int64_t num_labels = ref.label_alphabet_size;
    const LabelId blank = cfg.blank_id;
    const std::int64_t num_steps = duration_to_feature_frames(ref.total_duration_sec, opts.frame_shift_ms) / r;

    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<LabelId> pick_label(0, static_cast<LabelId>(num_labels - 2));
    std::uniform_int_distribution<std::int64_t> pick_length(1, 2);
    std::uniform_int_distribution<std::int64_t> pick_gap(1, opts.spike_gap_max);
    std::uniform_int_distribution<std::int64_t> pick_jitter(-opts.jitter_steps, opts.jitter_steps);
    auto nonblank = [&] {
        const LabelId y = pick_label(rng);
        return y >= blank ? y + 1 : y;
    };

    std::vector<LabelId> labels(static_cast<std::size_t>(num_steps), blank);
    std::vector<bool> in_speech(static_cast<std::size_t>(num_steps), false);
    std::vector<Spike> spikes;
    for (const auto& [start, end] : ref.speech_regions) {
        const auto [first_frame, last_frame] = region_to_feature_frames(start, end, opts.frame_shift_ms);
        const std::int64_t k_begin = (first_frame + r - 1) / r;
        const std::int64_t k_end = std::min(num_steps, last_frame / r);
        if (k_begin > k_end) continue;
        for (std::int64_t k = k_begin; k <= k_end; ++k) in_speech[static_cast<std::size_t>(k - 1)] = true;

        std::int64_t step = k_begin;
        while (true) {
            const std::int64_t length = std::min(pick_length(rng), k_end - step + 1);
            spikes.push_back({step, length, nonblank()});
            const std::int64_t spike_end = step + length - 1;
            const std::int64_t next = spike_end + 1 + pick_gap(rng);
            if (next > k_end) {
                if (spike_end < k_end) spikes.push_back({k_end, 1, nonblank()});
                break;
            }
            step = next;
        }
    }
    for (const Spike& spike : spikes) {
        const std::int64_t shift = pick_jitter(rng);
        for (std::int64_t i = 0; i < spike.length; ++i) {
            const std::int64_t k = clip_to_stream(spike.step + shift + i, 1, num_steps);
            labels[static_cast<std::size_t>(k - 1)] = spike.label;
        }
    }

    PosteriorStream out;
    out.scores.resize(num_steps, num_labels);
    out.blank_id = blank;
    out.frame_shift_ms = opts.frame_shift_ms;
    out.subsample_factor = r;
    out.kind = opts.kind;

    std::uniform_real_distribution<double> spike_peak(0.6, 0.95);
    std::uniform_real_distribution<double> gap_peak(0.6, 0.9);
    std::uniform_real_distribution<double> silence_peak(0.9, 0.99);
    std::uniform_real_distribution<float> weight(0.5f, 1.5f);
    std::uniform_real_distribution<double> logit_offset(-2.0, 2.0);
    std::vector<float> weights(static_cast<std::size_t>(num_labels));

    for (std::int64_t k = 1; k <= num_steps; ++k) {
        const auto idx = static_cast<std::size_t>(k - 1);
        const LabelId top = labels[idx];
        double peak;
        if (top != blank) {
            peak = spike_peak(rng);
        } else if (in_speech[idx]) {
            peak = gap_peak(rng);
        } else {
            peak = silence_peak(rng);
        }

        double total = 0.0;
        for (std::int64_t j = 0; j < num_labels; ++j) {
            const float w = j == top ? 0.0f : weight(rng);
            weights[static_cast<std::size_t>(j)] = w;
            total += w;
        }
        const double scale = (1.0 - peak) / total;
        auto row = out.scores.row(k - 1);
        for (std::int64_t j = 0; j < num_labels; ++j) {
            row(j) = static_cast<float>(weights[static_cast<std::size_t>(j)] * scale);
        }
        row(top) = static_cast<float>(peak);

        if (opts.kind == ScoreKind::PreSoftmax) {
            const float offset = static_cast<float>(logit_offset(rng));
            row = row.array().log() + offset;
        }
    }
    return out;
}

std::vector<std::int16_t> synthesize_audio(const ReferenceAnnotation& ref, int sample_rate_hz,
                                           std::uint64_t seed) {
    ref.validate();
    if (sample_rate_hz <= 0) throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
    const auto num_samples =
        static_cast<std::size_t>(std::llround(ref.total_duration_sec * sample_rate_hz));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);
    std::uniform_real_distribution<double> pitch(110.0, 260.0);

    std::vector<double> signal(num_samples);
    for (double& x : signal) x = 0.002 * noise(rng);
    for (const auto& [start, end] : ref.speech_regions) {
        const double f0 = pitch(rng);
        const auto first = static_cast<std::size_t>(std::llround(start * sample_rate_hz));
        const auto last = std::min(num_samples, static_cast<std::size_t>(std::llround(end * sample_rate_hz)));
        for (std::size_t i = first; i < last; ++i) {
            const double t = static_cast<double>(i) / sample_rate_hz;
            const double phase = 2.0 * std::numbers::pi * f0 * t;
            signal[i] += 0.25 * std::sin(phase) + 0.1 * std::sin(2.0 * phase) + 0.05 * noise(rng);
        }
    }
    std::vector<std::int16_t> pcm(num_samples);
    for (std::size_t i = 0; i < num_samples; ++i) {
        const double v = std::clamp(signal[i], -1.0, 1.0) * 32767.0;
        pcm[i] = static_cast<std::int16_t>(std::lround(v));
    }
    return pcm;
}

}  // namespace ctcseg
