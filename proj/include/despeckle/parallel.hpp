#pragma once

namespace despeckle {

/// Caps the worker count used by filters and metrics. 0 restores the
/// runtime default (machine parallelism).
void set_thread_count(int threads);

/// Worker count the next parallel region will use.
int thread_count();

}  // namespace despeckle
