#pragma once

namespace cglkit {

/// Upper bound on OpenMP threads used by the library. 0 restores the
/// runtime default (machine parallelism).
void set_thread_count(int threads);
int thread_count();

}  // namespace cglkit
