// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ctcseg/core.hpp"
#include "ctcseg/evaluate.hpp"
#include "ctcseg/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctcseg {

// ---------------------------------------------------------------------------
// CTCP posterior files
//
//   offset size
//   0      4    magic "CTCP"
//   4      2    u16 version (1)
//   6      1    u8 flags, bit0 set = probabilities, clear = pre-softmax scores
//   7      1    u8 reserved (0)
//   8      4    u32 num_frames (0xFFFFFFFF = unknown, stream until EOF)
//   12     4    u32 num_labels
//   16     4    u32 blank_id
//   20     4    f32 frame_shift_ms (raw feature frame shift)
//   24     4    u32 subsample_factor
//   28          num_frames rows of num_labels f32
//
// All fields little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::uint16_t kCtcpVersion = 1;
inline constexpr std::size_t kCtcpHeaderSize = 28;
inline constexpr std::uint32_t kCtcpUnknownFrames = 0xFFFFFFFFu;

struct CtcpHeader {
    std::uint16_t version = kCtcpVersion;
    ScoreKind kind = ScoreKind::Probabilities;
    std::uint32_t num_frames = 0;
    std::uint32_t num_labels = 0;
    std::uint32_t blank_id = 0;
    float frame_shift_ms = 10.0f;
    std::uint32_t subsample_factor = 1;

    bool length_known() const { return num_frames != kCtcpUnknownFrames; }
};

CtcpHeader header_for(const PosteriorStream& stream);
void write_ctcp_header(std::ostream& os, const CtcpHeader& header);
CtcpHeader read_ctcp_header(std::istream& is);

void write_posteriors(std::ostream& os, const PosteriorStream& stream);
void write_posterior_file(const std::filesystem::path& path, const PosteriorStream& stream);

/// Reads a complete CTCP stream. Row sums are checked when the header flags
/// probabilities.
PosteriorStream read_posteriors(std::istream& is);
PosteriorStream read_posterior_file(const std::filesystem::path& path);

/// Incremental CTCP reader: parses the header up front, then hands out one
/// frame at a time. Only the current frame is held in memory. Errors are
/// thrown at the offending frame after all earlier frames were returned.
class PosteriorFrameReader {
public:
    explicit PosteriorFrameReader(std::istream& is);

    const CtcpHeader& header() const { return header_; }
    /// Next frame, or nullopt at a clean end of stream. The span stays valid
    /// until the next call.
    std::optional<std::span<const float>> next();
    std::int64_t frames_read() const { return frames_read_; }

private:
    std::istream& is_;
    CtcpHeader header_;
    std::vector<char> raw_;
    std::vector<float> frame_;
    std::int64_t frames_read_ = 0;
};

// ---------------------------------------------------------------------------
// Segment output
// ---------------------------------------------------------------------------

enum class SegmentFormat {
    Jsonl,
    Ctm,
    Tsv,
};

SegmentFormat parse_segment_format(std::string_view name);

/// Seconds for feature frame t with six decimals, rounded half-to-even on the
/// exact product t * frame_shift_ms.
std::string format_seconds(std::int64_t t, double frame_shift_ms);

void write_segment(std::ostream& os, const Segment& seg, SegmentFormat format, double frame_shift_ms,
                   std::string_view stream_name = "stream");
void write_segments(std::ostream& os, std::span<const Segment> segments, SegmentFormat format,
                    double frame_shift_ms, std::string_view stream_name = "stream");
void write_event(std::ostream& os, const SegmentEvent& event, double frame_shift_ms);

/// Parses jsonl produced by write_segments (index, t_start, t_end required).
std::vector<Segment> read_segments_jsonl(std::istream& is);

// ---------------------------------------------------------------------------
// Annotations, reports and audio
// ---------------------------------------------------------------------------

/// {"duration_sec": float, "regions": [[start, end], ...], "num_labels": int (optional)}
ReferenceAnnotation parse_annotation(std::string_view json_text);
ReferenceAnnotation read_annotation_file(const std::filesystem::path& path);
std::string annotation_to_json(const ReferenceAnnotation& ref);

std::string report_to_json(const EvalReport& report);

struct WavAudio {
    int sample_rate_hz = 16000;
    std::vector<std::int16_t> samples;

    double duration_sec() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

/// RIFF/WAVE, PCM 16-bit, mono only.
WavAudio read_wav(std::istream& is);
WavAudio read_wav_file(const std::filesystem::path& path);
void write_wav(std::ostream& os, const WavAudio& audio);
void write_wav_file(const std::filesystem::path& path, const WavAudio& audio);

}  // namespace ctcseg
