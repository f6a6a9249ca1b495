// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ctcseg/core.hpp"

#include <span>
#include <vector>

namespace ctcseg {

/// Index of the largest score in one frame. Ties go to the lowest label id, so
/// the result is the same for probabilities, log-probabilities and pre-softmax
/// activations (any strictly increasing transform of the row).
template <typename Derived>
LabelId argmax_label(const Eigen::DenseBase<Derived>& frame) {
    const Eigen::Index n = frame.size();
    if (n == 0) throw Error(ErrorKind::EmptyStream, "frame has no labels");
    Eigen::Index best = 0;
    auto best_value = frame.coeff(0);
    for (Eigen::Index j = 1; j < n; ++j) {
        const auto v = frame.coeff(j);
        if (v > best_value) {
            best_value = v;
            best = j;
        }
    }
    return static_cast<LabelId>(best);
}

template <typename Scalar>
LabelId argmax_label(std::span<const Scalar> frame) {
    using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
    return argmax_label(Eigen::Map<const Row>(frame.data(), static_cast<Eigen::Index>(frame.size())));
}

/// Frame-by-frame argmax over a (steps x labels) score matrix.
template <typename Derived>
LabelStream greedy_decode(const Eigen::MatrixBase<Derived>& scores, LabelId blank_id) {
    if (scores.rows() == 0) throw Error(ErrorKind::EmptyStream, "posterior stream has no frames");
    std::vector<LabelId> labels(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index k = 0; k < scores.rows(); ++k) {
        labels[static_cast<std::size_t>(k)] = argmax_label(scores.row(k));
    }
    return LabelStream(std::move(labels), blank_id, scores.cols());
}

template <typename Scalar>
LabelStream greedy_decode(const BasicPosteriorStream<Scalar>& stream) {
    return greedy_decode(stream.scores, stream.blank_id);
}

/// Standard CTC collapse: merge consecutive repeats, then drop blanks.
std::vector<LabelId> ctc_collapse(std::span<const LabelId> labels, LabelId blank_id);

inline std::vector<LabelId> ctc_collapse(const LabelStream& labels) {
    return ctc_collapse(labels.labels, labels.blank_id);
}

/// Length of ctc_collapse(labels) without materialising it.
std::int64_t collapsed_length(std::span<const LabelId> labels, LabelId blank_id);

}  // namespace ctcseg
