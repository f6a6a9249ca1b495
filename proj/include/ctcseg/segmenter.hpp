// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ctcseg/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ctcseg {

// ---------------------------------------------------------------------------
// Offline (two-pass) segmentation
// ---------------------------------------------------------------------------

/// Splits the label stream into maximal non-blank regions separated by blank
/// runs of at least V steps, then expands each region by the onset/offset
/// margins (times r) and clips to [1, T]. Segments are not merged here.
std::vector<Segment> split_on_blank_runs(const LabelStream& labels, const SegmenterConfig& cfg,
                                         std::int64_t total_feature_frames);

/// Merges segments whose feature spans share at least one frame and
/// renumbers them from 1. Input must be sorted by t_start.
std::vector<Segment> merge_overlapping(std::span<const Segment> segments);

/// split_on_blank_runs followed by merge_overlapping.
///
/// total_feature_frames may differ from r * K by less than r (ragged tail).
std::vector<Segment> segment_offline(const LabelStream& labels, const SegmenterConfig& cfg,
                                     std::int64_t total_feature_frames);

// ---------------------------------------------------------------------------
// Online (single-pass) segmentation
// ---------------------------------------------------------------------------

enum class OnlineMode {
    Idle,
    InSpeech,
    CountingBlanks,
};

struct OnlineState {
    OnlineMode mode = OnlineMode::Idle;
    std::int64_t blank_run = 0;
    /// Last consumed step (0 before the first label).
    std::int64_t k_current = 0;
    std::int64_t k_last_nonblank = 0;
    std::optional<Segment> pending_segment;
    LabelId prev_label = -1;
    std::int64_t segments_opened = 0;
    bool finished = false;
};

/// Consumes the label for step state.k_current + 1.
///
/// Open fires on the first non-blank after Idle, with t_start computed
/// retroactively (the caller keeps m_s * r feature frames of lookback). Close
/// fires on the step where the blank run reaches V, so its latency is exactly
/// V steps after the last non-blank; the reported t_end includes the offset
/// margin and may lie up to m_e * r frames past the decision point. Close
/// spans are clipped below only, since the stream length is not known yet.
std::optional<SegmentEvent> segment_online_step(OnlineState& state, LabelId label,
                                                const SegmenterConfig& cfg);

/// Flushes a segment that was still open at end of stream. t_end is clipped
/// to total_feature_frames. A second call returns nothing.
std::optional<SegmentEvent> segment_online_finish(OnlineState& state, const SegmenterConfig& cfg,
                                                  std::int64_t total_feature_frames);

class OnlineSegmenter {
public:
    explicit OnlineSegmenter(SegmenterConfig cfg);

    std::optional<SegmentEvent> push(LabelId label) {
        return segment_online_step(state_, label, cfg_);
    }
    std::optional<SegmentEvent> finish(std::int64_t total_feature_frames) {
        return segment_online_finish(state_, cfg_, total_feature_frames);
    }
    void reset() { state_ = OnlineState{}; }

    const OnlineState& state() const { return state_; }
    const SegmenterConfig& config() const { return cfg_; }

private:
    SegmenterConfig cfg_;
    OnlineState state_;
};

/// Rebuilds the unmerged segment list from an online event log, clipping
/// every span to [1, total_feature_frames].
std::vector<Segment> segments_from_events(std::span<const SegmentEvent> events,
                                          std::int64_t total_feature_frames);

/// Turns online events into final segments as early as they are decidable:
/// overlapping segments are merged and the min-length filter is applied,
/// giving the same output as the offline path.
///
/// When the stream length is unknown up front, a segment is only released
/// once its end lies inside the part of the stream already seen, so clipping
/// at finish can never change it.
class SegmentAssembler {
public:
    SegmentAssembler(SegmenterConfig cfg, std::optional<std::int64_t> total_feature_frames,
                     bool apply_length_filter);

    /// Segments ready for output are appended to out.
    void on_event(const SegmentEvent& event, std::vector<Segment>& out);
    /// Releases the held segment once no segment opening after step k_now can
    /// overlap it.
    void advance(std::int64_t k_now, std::vector<Segment>& out);
    /// total_feature_frames is required here if it was not given at construction.
    void finish(std::vector<Segment>& out, std::optional<std::int64_t> total_feature_frames = std::nullopt);

private:
    void release(std::vector<Segment>& out);
    Segment clipped(Segment seg) const;
    std::int64_t clip(std::int64_t t) const;

    SegmenterConfig cfg_;
    std::optional<std::int64_t> total_feature_frames_;
    bool apply_length_filter_;
    std::optional<Segment> held_;
    std::optional<std::int64_t> open_t_start_;
    std::int64_t emitted_ = 0;
};

// ---------------------------------------------------------------------------
// Minimum output-length ratio
// ---------------------------------------------------------------------------

enum class LengthDecision {
    Keep,
    Reject,
};

/// Rejects when output_len / encoded_len <= alpha (boundary included).
LengthDecision min_length_filter(std::int64_t output_len, std::int64_t encoded_len, double alpha);

/// Number of subsampled steps whose feature index falls inside the segment span.
std::int64_t encoded_length(const Segment& seg, std::int64_t subsample_factor);

/// Drops segments whose collapsed transcript is too short for their encoded
/// length and renumbers the survivors.
std::vector<Segment> apply_min_length_filter(std::span<const Segment> segments,
                                             const SegmenterConfig& cfg);

}  // namespace ctcseg
