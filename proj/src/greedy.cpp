// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/greedy.hpp"

namespace ctcseg {

std::vector<LabelId> ctc_collapse(std::span<const LabelId> labels, LabelId blank_id) {
    std::vector<LabelId> out;
    LabelId prev = -1;
    for (const LabelId y : labels) {
        if (y != blank_id && y != prev) out.push_back(y);
        prev = y;
    }
    return out;
}

std::int64_t collapsed_length(std::span<const LabelId> labels, LabelId blank_id) {
    std::int64_t n = 0;
    LabelId prev = -1;
    for (const LabelId y : labels) {
        if (y != blank_id && y != prev) ++n;
        prev = y;
    }
    return n;
}

}  // namespace ctcseg
