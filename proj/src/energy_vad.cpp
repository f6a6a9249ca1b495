// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/energy_vad.hpp"

#include <algorithm>
#include <cmath>

namespace ctcseg {

std::vector<double> frame_energies(std::span<const std::int16_t> samples, int sample_rate_hz,
                                   double frame_ms) {
    if (samples.empty()) throw Error(ErrorKind::EmptyAudio, "no samples");
    if (sample_rate_hz <= 0 || !(frame_ms > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "sample rate and frame length must be positive");
    }
    const auto frame_len = static_cast<std::size_t>(std::llround(sample_rate_hz * frame_ms / 1000.0));
    if (frame_len == 0) throw Error(ErrorKind::InvalidConfig, "frame shorter than one sample");

    std::vector<double> energies;
    energies.reserve(samples.size() / frame_len + 1);
    for (std::size_t begin = 0; begin < samples.size(); begin += frame_len) {
        const std::size_t end = std::min(samples.size(), begin + frame_len);
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double x = samples[i] / 32768.0;
            acc += x * x;
        }
        energies.push_back(acc / static_cast<double>(end - begin));
    }
    return energies;
}

std::vector<Segment> energy_vad(std::span<const std::int16_t> samples, int sample_rate_hz,
                                const EnergyVadConfig& cfg) {
    if (cfg.hangover_frames < 0) throw Error(ErrorKind::InvalidConfig, "hangover must be >= 0");
    const std::vector<double> energies = frame_energies(samples, sample_rate_hz, cfg.frame_ms);
    const auto num_frames = static_cast<std::int64_t>(energies.size());

    std::vector<Segment> out;
    std::int64_t hold_until = 0;  // last frame still covered by hangover
    std::int64_t seg_start = 0;
    for (std::int64_t t = 1; t <= num_frames; ++t) {
        if (energies[static_cast<std::size_t>(t - 1)] > cfg.threshold) {
            if (seg_start == 0) seg_start = t;
            hold_until = t + cfg.hangover_frames;
        }
        const bool speech = seg_start != 0 && t <= hold_until;
        if (!speech && seg_start != 0) {
            const std::int64_t seg_end = t - 1;
            out.push_back({static_cast<std::int64_t>(out.size()) + 1, seg_start, seg_end, seg_start, seg_end, 0});
            seg_start = 0;
        }
    }
    if (seg_start != 0) {
        const std::int64_t seg_end = std::min(hold_until, num_frames);
        out.push_back({static_cast<std::int64_t>(out.size()) + 1, seg_start, seg_end, seg_start, seg_end, 0});
    }
    return out;
}

}  // namespace ctcseg
