// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/core.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace ctcseg {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::EmptyStream: return "EmptyStream";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::EmptyAudio: return "EmptyAudio";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::RowSumViolation: return "RowSumViolation";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::InvalidAnnotation: return "InvalidAnnotation";
    case ErrorKind::BadWav: return "BadWav";
    case ErrorKind::SinkError: return "SinkError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

template <typename Scalar>
void validate(const BasicPosteriorStream<Scalar>& stream, double row_sum_tolerance) {
    if (stream.subsample_factor < 1) {
        throw Error(ErrorKind::InvalidConfig, "subsample_factor must be >= 1");
    }
    if (!(stream.frame_shift_ms > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "frame_shift_ms must be positive");
    }
    if (stream.num_labels() < 1) {
        throw Error(ErrorKind::InvalidConfig, "num_labels must be >= 1");
    }
    if (stream.blank_id < 0 || stream.blank_id >= stream.num_labels()) {
        throw Error(ErrorKind::InvalidConfig, "blank_id out of range");
    }
    for (Eigen::Index row = 0; row < stream.scores.rows(); ++row) {
        const auto frame = stream.scores.row(row);
        if (!frame.allFinite()) {
            throw Error(ErrorKind::InvalidValue,
                        "non-finite score in row " + std::to_string(row + 1));
        }
        if (stream.kind != ScoreKind::Probabilities) continue;
        const double sum = frame.template cast<double>().sum();
        if (frame.minCoeff() < -row_sum_tolerance || frame.maxCoeff() > 1.0 + row_sum_tolerance ||
            std::abs(sum - 1.0) > row_sum_tolerance) {
            std::ostringstream msg;
            msg << "row " << (row + 1) << " sums to " << sum;
            throw Error(ErrorKind::RowSumViolation, msg.str());
        }
    }
}

template void validate(const BasicPosteriorStream<float>&, double);
template void validate(const BasicPosteriorStream<double>&, double);

LabelStream::LabelStream(std::vector<LabelId> labels_in, LabelId blank, std::int64_t alphabet)
    : labels(std::move(labels_in)), blank_id(blank), num_labels(alphabet) {
    if (num_labels < 1 || blank_id < 0 || blank_id >= num_labels) {
        throw Error(ErrorKind::InvalidConfig, "blank_id must lie in [0, num_labels)");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_labels) {
            throw Error(ErrorKind::InvalidArgument,
                        "label at step " + std::to_string(i + 1) + " out of range");
        }
    }
}

void SegmenterConfig::validate() const {
    if (v_threshold < 1) throw Error(ErrorKind::InvalidConfig, "threshold V must be >= 1");
    if (onset_margin < 0 || offset_margin < 0) {
        throw Error(ErrorKind::InvalidConfig, "margins must be non-negative");
    }
    if (subsample_factor < 1) {
        throw Error(ErrorKind::InvalidConfig, "subsample_factor must be >= 1");
    }
    if (blank_id < 0) throw Error(ErrorKind::InvalidConfig, "blank_id must be non-negative");
    if (!(min_len_ratio >= 0.0 && min_len_ratio < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "min_len_ratio must lie in [0, 1)");
    }
}

void SegmenterConfig::validate_for(std::int64_t num_labels) const {
    validate();
    if (blank_id >= num_labels) {
        throw Error(ErrorKind::InvalidConfig,
                    "blank_id " + std::to_string(blank_id) + " >= num_labels " +
                        std::to_string(num_labels));
    }
}

double min_blank_duration_ms(const SegmenterConfig& cfg, double frame_shift_ms) {
    return static_cast<double>(subsampled_to_feature_index(cfg.v_threshold, cfg.subsample_factor)) *
           frame_shift_ms;
}

std::ostream& operator<<(std::ostream& os, const Segment& seg) {
    return os << "Segment{#" << seg.index << " k=[" << seg.k_first_nonblank << ","
              << seg.k_last_nonblank << "] t=[" << seg.t_start << "," << seg.t_end
              << "] tokens=" << seg.num_tokens << "}";
}

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::Open: return "open";
    case EventKind::Close: return "close";
    case EventKind::Flush: return "flush";
    }
    return "unknown";
}

}  // namespace ctcseg
