// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("ctcseg");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("CTC_SEG_LOG")) spdlog::set_level(spdlog::level::from_str(level));

    std::ios::sync_with_stdio(false);
    return ctcseg::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
