// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/evaluate.hpp"

#include <algorithm>
#include <cstdlib>
#include <tuple>

namespace ctcseg {

namespace {

std::vector<bool> paint(std::span<const Segment> segments, std::int64_t total_frames) {
    std::vector<bool> mask(static_cast<std::size_t>(total_frames), false);
    for (const Segment& seg : segments) {
        const std::int64_t lo = std::max<std::int64_t>(1, seg.t_start);
        const std::int64_t hi = std::min(total_frames, seg.t_end);
        for (std::int64_t t = lo; t <= hi; ++t) mask[static_cast<std::size_t>(t - 1)] = true;
    }
    return mask;
}

double ratio(std::int64_t hits, std::int64_t denom, std::int64_t other) {
    if (denom == 0) return other == 0 ? 1.0 : 0.0;
    return static_cast<double>(hits) / static_cast<double>(denom);
}

std::int64_t overlap(const Segment& a, const Segment& b) {
    return std::max<std::int64_t>(0, std::min(a.t_end, b.t_end) - std::max(a.t_start, b.t_start) + 1);
}

}  // namespace

std::vector<Segment> reference_segments(const ReferenceAnnotation& ref, double frame_shift_ms,
                                        std::int64_t total_frames) {
    std::vector<Segment> out;
    for (const auto& [start, end] : ref.speech_regions) {
        auto [first, last] = region_to_feature_frames(start, end, frame_shift_ms);
        last = std::min(last, total_frames);
        if (first > last) continue;
        const auto index = static_cast<std::int64_t>(out.size()) + 1;
        out.push_back({index, first, last, first, last, 0});
    }
    return out;
}

EvalReport evaluate(std::span<const Segment> hyp, std::span<const Segment> ref, std::int64_t total_frames) {
    if (total_frames < 0) throw Error(ErrorKind::InvalidArgument, "total_frames must be >= 0");
    const std::vector<bool> hyp_mask = paint(hyp, total_frames);
    const std::vector<bool> ref_mask = paint(ref, total_frames);
    std::int64_t n_hyp = 0;
    std::int64_t n_ref = 0;
    std::int64_t n_both = 0;
    for (std::size_t i = 0; i < hyp_mask.size(); ++i) {
        n_hyp += hyp_mask[i];
        n_ref += ref_mask[i];
        n_both += hyp_mask[i] && ref_mask[i];
    }

    EvalReport report;
    report.frame_precision = ratio(n_both, n_hyp, n_ref);
    report.frame_recall = ratio(n_both, n_ref, n_hyp);
    const double p = report.frame_precision;
    const double r = report.frame_recall;
    report.frame_f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    report.n_hyp_segments = static_cast<std::int64_t>(hyp.size());
    report.n_ref_segments = static_cast<std::int64_t>(ref.size());

    // Greedy one-to-one matching, largest overlap first.
    std::vector<std::tuple<std::int64_t, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (const std::int64_t ov = overlap(hyp[i], ref[j]); ov > 0) pairs.emplace_back(-ov, j, i);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> hyp_used(hyp.size(), false);
    std::vector<bool> ref_used(ref.size(), false);
    double abs_err = 0.0;
    for (const auto& [neg_ov, j, i] : pairs) {
        if (hyp_used[i] || ref_used[j]) continue;
        hyp_used[i] = ref_used[j] = true;
        ++report.n_matched;
        abs_err += static_cast<double>(std::llabs(hyp[i].t_start - ref[j].t_start) +
                                       std::llabs(hyp[i].t_end - ref[j].t_end));
    }
    if (report.n_matched > 0) {
        report.boundary_mae_frames = abs_err / (2.0 * static_cast<double>(report.n_matched));
    }
    return report;
}

EvalReport evaluate(std::span<const Segment> hyp, const ReferenceAnnotation& ref, double frame_shift_ms,
                    std::int64_t total_frames) {
    const std::vector<Segment> ref_segments = reference_segments(ref, frame_shift_ms, total_frames);
    return evaluate(hyp, ref_segments, total_frames);
}

}  // namespace ctcseg
