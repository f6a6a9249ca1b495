// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "ctcseg/bench.hpp"
#include "ctcseg/core.hpp"
#include "ctcseg/energy_vad.hpp"
#include "ctcseg/evaluate.hpp"
#include "ctcseg/greedy.hpp"
#include "ctcseg/io.hpp"
#include "ctcseg/segmenter.hpp"
#include "ctcseg/simulate.hpp"
