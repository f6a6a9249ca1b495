// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctcseg {

using LabelId = std::int32_t;

/// Every failure raised by the library carries one of these kinds so callers
/// can branch without parsing messages.
enum class ErrorKind {
    EmptyStream,
    InvalidConfig,
    InvalidArgument,
    InvalidState,
    EmptyAudio,
    BadMagic,
    VersionMismatch,
    TruncatedFile,
    RowSumViolation,
    InvalidValue,
    InvalidAnnotation,
    BadWav,
    SinkError,
    IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

enum class ScoreKind : std::uint8_t {
    Probabilities,
    PreSoftmax,
};

/// Frame-synchronous CTC scores, one row per subsampled step and one column per
/// label (blank included). Rows are contiguous so a single frame can be handed
/// around as a span.
template <typename Scalar>
struct BasicPosteriorStream {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    Matrix scores;
    LabelId blank_id = 0;
    /// Raw feature frame shift (not multiplied by the subsampling factor).
    double frame_shift_ms = 10.0;
    std::int64_t subsample_factor = 1;
    ScoreKind kind = ScoreKind::Probabilities;

    std::int64_t num_frames() const { return scores.rows(); }
    std::int64_t num_labels() const { return scores.cols(); }
    /// Feature frames covered by the stream, r * K.
    std::int64_t feature_frames() const { return num_frames() * subsample_factor; }
    double duration_sec() const {
        return static_cast<double>(feature_frames()) * frame_shift_ms / 1000.0;
    }
};

using PosteriorStream = BasicPosteriorStream<float>;

/// Throws InvalidValue / RowSumViolation when the stream breaks its invariants.
template <typename Scalar>
void validate(const BasicPosteriorStream<Scalar>& stream, double row_sum_tolerance = 1e-4);

/// Greedy label per subsampled step. Step k (1-based) is labels[k - 1].
struct LabelStream {
    std::vector<LabelId> labels;
    LabelId blank_id = 0;
    std::int64_t num_labels = 0;

    LabelStream() = default;
    LabelStream(std::vector<LabelId> labels, LabelId blank_id, std::int64_t num_labels);

    std::int64_t num_steps() const { return static_cast<std::int64_t>(labels.size()); }
    LabelId at_step(std::int64_t k) const { return labels[static_cast<std::size_t>(k - 1)]; }
    bool is_blank(std::int64_t k) const { return at_step(k) == blank_id; }
};

/// Threshold and margins are counted in subsampled steps.
struct SegmenterConfig {
    std::int64_t v_threshold = 16;
    std::int64_t onset_margin = 2;
    std::int64_t offset_margin = 3;
    std::int64_t subsample_factor = 4;
    LabelId blank_id = 0;
    double min_len_ratio = 0.1;

    void validate() const;
    void validate_for(std::int64_t num_labels) const;
};

/// Smallest blank run, in milliseconds, that splits two segments.
double min_blank_duration_ms(const SegmenterConfig& cfg, double frame_shift_ms);

/// A detected speech region. k_* are subsampled steps, t_* feature frames;
/// both 1-based and inclusive.
struct Segment {
    std::int64_t index = 0;
    std::int64_t k_first_nonblank = 0;
    std::int64_t k_last_nonblank = 0;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    /// Collapsed greedy transcript length over [k_first_nonblank, k_last_nonblank].
    std::int64_t num_tokens = 0;

    std::int64_t num_feature_frames() const { return t_end - t_start + 1; }
    double start_sec(double frame_shift_ms) const {
        return static_cast<double>(t_start) * frame_shift_ms / 1000.0;
    }
    double end_sec(double frame_shift_ms) const {
        return static_cast<double>(t_end) * frame_shift_ms / 1000.0;
    }

    friend bool operator==(const Segment&, const Segment&) = default;
};

std::ostream& operator<<(std::ostream& os, const Segment& seg);

enum class EventKind {
    Open,
    Close,
    Flush,
};

const char* to_string(EventKind kind);

/// Open carries t_start and k_first_nonblank only; Close and Flush carry the full span.
struct SegmentEvent {
    EventKind kind = EventKind::Open;
    std::int64_t emitted_at_step = 0;
    Segment segment;

    friend bool operator==(const SegmentEvent&, const SegmentEvent&) = default;
};

constexpr std::int64_t subsampled_to_feature_index(std::int64_t k, std::int64_t r) {
    return k * r;
}

constexpr std::int64_t clip_to_stream(std::int64_t t, std::int64_t t_min, std::int64_t t_max) {
    return t < t_min ? t_min : (t > t_max ? t_max : t);
}

}  // namespace ctcseg
