// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <iosfwd>

namespace ctcseg::cli {

/// Exit codes: 0 success, 1 input/format error, 2 bad command line.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the ctcseg binary and the in-process CLI tests.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace ctcseg::cli
