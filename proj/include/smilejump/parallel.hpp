#pragma once

namespace smilejump {

/// Worker count used by the OpenMP kernels: omp_get_max_threads(), capped by
/// SMILEJUMP_THREADS when that variable holds a positive integer.
int worker_count();

/// Applies worker_count() (or an explicit positive cap) to the OpenMP runtime.
void configure_workers(int cap = 0);

} // namespace smilejump
