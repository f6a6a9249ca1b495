// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/segmenter.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace ctcseg {

namespace {

Segment make_segment(std::int64_t k_first, std::int64_t k_last, std::int64_t tokens,
                     const SegmenterConfig& cfg, std::int64_t total_feature_frames) {
    const std::int64_t r = cfg.subsample_factor;
    Segment seg;
    seg.k_first_nonblank = k_first;
    seg.k_last_nonblank = k_last;
    seg.num_tokens = tokens;
    seg.t_start = clip_to_stream(subsampled_to_feature_index(k_first, r) - r * cfg.onset_margin, 1,
                                 total_feature_frames);
    seg.t_end = clip_to_stream(subsampled_to_feature_index(k_last, r) + r * cfg.offset_margin, 1,
                               total_feature_frames);
    return seg;
}

void check_stream_length(std::int64_t num_steps, std::int64_t r, std::int64_t total_feature_frames) {
    if (std::llabs(total_feature_frames - num_steps * r) >= r) {
        throw Error(ErrorKind::InvalidArgument,
                    "total_feature_frames " + std::to_string(total_feature_frames) +
                        " inconsistent with " + std::to_string(num_steps) + " steps at r=" +
                        std::to_string(r));
    }
}

}  // namespace

std::vector<Segment> split_on_blank_runs(const LabelStream& labels, const SegmenterConfig& cfg,
                                         std::int64_t total_feature_frames) {
    cfg.validate_for(labels.num_labels);
    const std::int64_t num_steps = labels.num_steps();
    if (num_steps == 0) return {};
    check_stream_length(num_steps, cfg.subsample_factor, total_feature_frames);

    std::vector<Segment> out;
    bool open = false;
    std::int64_t first = 0;
    std::int64_t last = 0;
    std::int64_t tokens = 0;
    std::int64_t blank_run = 0;
    LabelId prev = -1;

    auto close = [&] {
        Segment seg = make_segment(first, last, tokens, cfg, total_feature_frames);
        seg.index = static_cast<std::int64_t>(out.size()) + 1;
        out.push_back(seg);
    };

    for (std::int64_t k = 1; k <= num_steps; ++k) {
        const LabelId y = labels.at_step(k);
        if (y == cfg.blank_id) {
            if (open) ++blank_run;
        } else {
            if (open && blank_run >= cfg.v_threshold) {
                close();
                open = false;
            }
            if (!open) {
                open = true;
                first = k;
                tokens = 0;
            }
            if (y != prev) ++tokens;
            last = k;
            blank_run = 0;
        }
        prev = y;
    }
    if (open) close();
    return out;
}

std::vector<Segment> merge_overlapping(std::span<const Segment> segments) {
    std::vector<Segment> out;
    for (const Segment& seg : segments) {
        if (!out.empty() && seg.t_start <= out.back().t_end) {
            Segment& back = out.back();
            back.k_last_nonblank = std::max(back.k_last_nonblank, seg.k_last_nonblank);
            back.t_end = std::max(back.t_end, seg.t_end);
            back.num_tokens += seg.num_tokens;
        } else {
            out.push_back(seg);
            out.back().index = static_cast<std::int64_t>(out.size());
        }
    }
    return out;
}

std::vector<Segment> segment_offline(const LabelStream& labels, const SegmenterConfig& cfg,
                                     std::int64_t total_feature_frames) {
    return merge_overlapping(split_on_blank_runs(labels, cfg, total_feature_frames));
}

std::optional<SegmentEvent> segment_online_step(OnlineState& state, LabelId label,
                                                const SegmenterConfig& cfg) {
    if (state.finished) {
        throw Error(ErrorKind::InvalidState, "segment_online_step called after finish; reset first");
    }
    if (label < 0) throw Error(ErrorKind::InvalidArgument, "negative label id");

    const std::int64_t r = cfg.subsample_factor;
    const std::int64_t k = ++state.k_current;
    const LabelId prev = state.prev_label;
    state.prev_label = label;

    if (label != cfg.blank_id) {
        state.k_last_nonblank = k;
        state.blank_run = 0;
        if (state.mode == OnlineMode::Idle) {
            Segment seg;
            seg.index = ++state.segments_opened;
            seg.k_first_nonblank = k;
            seg.k_last_nonblank = k;
            seg.t_start = std::max<std::int64_t>(1, subsampled_to_feature_index(k, r) - r * cfg.onset_margin);
            seg.num_tokens = 1;
            state.pending_segment = seg;
            state.mode = OnlineMode::InSpeech;
            return SegmentEvent{EventKind::Open, k, seg};
        }
        state.pending_segment->k_last_nonblank = k;
        if (label != prev) ++state.pending_segment->num_tokens;
        state.mode = OnlineMode::InSpeech;
        return std::nullopt;
    }

    switch (state.mode) {
    case OnlineMode::Idle:
        return std::nullopt;
    case OnlineMode::InSpeech:
        state.mode = OnlineMode::CountingBlanks;
        state.blank_run = 1;
        break;
    case OnlineMode::CountingBlanks:
        ++state.blank_run;
        break;
    }
    if (state.blank_run < cfg.v_threshold) return std::nullopt;

    Segment seg = *state.pending_segment;
    seg.t_end = subsampled_to_feature_index(state.k_last_nonblank, r) + r * cfg.offset_margin;
    state.pending_segment.reset();
    state.mode = OnlineMode::Idle;
    state.blank_run = 0;
    return SegmentEvent{EventKind::Close, k, seg};
}

std::optional<SegmentEvent> segment_online_finish(OnlineState& state, const SegmenterConfig& cfg,
                                                  std::int64_t total_feature_frames) {
    if (state.finished) return std::nullopt;
    state.finished = true;
    if (state.mode == OnlineMode::Idle) return std::nullopt;

    const std::int64_t r = cfg.subsample_factor;
    Segment seg = *state.pending_segment;
    seg.t_start = clip_to_stream(seg.t_start, 1, total_feature_frames);
    seg.t_end = clip_to_stream(subsampled_to_feature_index(state.k_last_nonblank, r) + r * cfg.offset_margin,
                               1, total_feature_frames);
    state.pending_segment.reset();
    state.mode = OnlineMode::Idle;
    state.blank_run = 0;
    return SegmentEvent{EventKind::Flush, state.k_current, seg};
}

OnlineSegmenter::OnlineSegmenter(SegmenterConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<Segment> segments_from_events(std::span<const SegmentEvent> events,
                                          std::int64_t total_feature_frames) {
    std::vector<Segment> out;
    for (const SegmentEvent& ev : events) {
        if (ev.kind == EventKind::Open) continue;
        Segment seg = ev.segment;
        seg.t_start = clip_to_stream(seg.t_start, 1, total_feature_frames);
        seg.t_end = clip_to_stream(seg.t_end, 1, total_feature_frames);
        out.push_back(seg);
    }
    return out;
}

SegmentAssembler::SegmentAssembler(SegmenterConfig cfg, std::optional<std::int64_t> total_feature_frames,
                                   bool apply_length_filter)
    : cfg_(cfg), total_feature_frames_(total_feature_frames), apply_length_filter_(apply_length_filter) {
    cfg_.validate();
    if (total_feature_frames_ && *total_feature_frames_ < 1) {
        throw Error(ErrorKind::InvalidArgument, "total_feature_frames must be >= 1");
    }
}

std::int64_t SegmentAssembler::clip(std::int64_t t) const {
    if (total_feature_frames_) return clip_to_stream(t, 1, *total_feature_frames_);
    return std::max<std::int64_t>(1, t);
}

Segment SegmentAssembler::clipped(Segment seg) const {
    seg.t_start = clip(seg.t_start);
    seg.t_end = clip(seg.t_end);
    return seg;
}

void SegmentAssembler::on_event(const SegmentEvent& event, std::vector<Segment>& out) {
    if (event.kind == EventKind::Open) {
        open_t_start_ = clip(event.segment.t_start);
        if (held_ && *open_t_start_ > held_->t_end) release(out);
        return;
    }
    open_t_start_.reset();
    const Segment seg = clipped(event.segment);
    if (held_ && seg.t_start > held_->t_end) release(out);
    if (!held_) {
        held_ = seg;
        return;
    }
    held_->k_last_nonblank = std::max(held_->k_last_nonblank, seg.k_last_nonblank);
    held_->t_end = std::max(held_->t_end, seg.t_end);
    held_->num_tokens += seg.num_tokens;
}

void SegmentAssembler::advance(std::int64_t k_now, std::vector<Segment>& out) {
    if (!held_ || open_t_start_) return;
    const std::int64_t r = cfg_.subsample_factor;
    if (!total_feature_frames_ && held_->t_end > subsampled_to_feature_index(k_now, r)) return;
    const std::int64_t earliest_start = clip(subsampled_to_feature_index(k_now + 1, r) - r * cfg_.onset_margin);
    if (earliest_start > held_->t_end) release(out);
}

void SegmentAssembler::finish(std::vector<Segment>& out, std::optional<std::int64_t> total_feature_frames) {
    if (total_feature_frames) total_feature_frames_ = total_feature_frames;
    if (!total_feature_frames_) {
        throw Error(ErrorKind::InvalidArgument, "stream length unknown at finish");
    }
    if (held_) {
        *held_ = clipped(*held_);
        release(out);
    }
}

void SegmentAssembler::release(std::vector<Segment>& out) {
    Segment seg = *held_;
    held_.reset();
    if (apply_length_filter_ &&
        min_length_filter(seg.num_tokens, encoded_length(seg, cfg_.subsample_factor),
                          cfg_.min_len_ratio) == LengthDecision::Reject) {
        return;
    }
    seg.index = ++emitted_;
    out.push_back(seg);
}

LengthDecision min_length_filter(std::int64_t output_len, std::int64_t encoded_len, double alpha) {
    if (encoded_len < 1) throw Error(ErrorKind::InvalidArgument, "encoded_len must be >= 1");
    if (output_len < 0) throw Error(ErrorKind::InvalidArgument, "output_len must be >= 0");
    const double ratio = static_cast<double>(output_len) / static_cast<double>(encoded_len);
    return ratio <= alpha ? LengthDecision::Reject : LengthDecision::Keep;
}

std::int64_t encoded_length(const Segment& seg, std::int64_t subsample_factor) {
    const std::int64_t r = subsample_factor;
    const std::int64_t first_step = (seg.t_start + r - 1) / r;
    const std::int64_t last_step = seg.t_end / r;
    return std::max<std::int64_t>(1, last_step - first_step + 1);
}

std::vector<Segment> apply_min_length_filter(std::span<const Segment> segments,
                                             const SegmenterConfig& cfg) {
    std::vector<Segment> out;
    for (const Segment& seg : segments) {
        if (min_length_filter(seg.num_tokens, encoded_length(seg, cfg.subsample_factor),
                              cfg.min_len_ratio) == LengthDecision::Reject) {
            continue;
        }
        out.push_back(seg);
        out.back().index = static_cast<std::int64_t>(out.size());
    }
    return out;
}

}  // namespace ctcseg
