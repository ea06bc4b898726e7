// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace gradientstage {

// Worker count used by parallel_rows. 0 restores the default (hardware
// concurrency).
void set_thread_count(int threads);
int thread_count();

// Calls fn(row) for every row in [0, rows). Rows are split into contiguous
// blocks, so output is identical for any thread count as long as fn only
// writes its own row.
void parallel_rows(int rows, const std::function<void(int)>& fn);

}  // namespace gradientstage
