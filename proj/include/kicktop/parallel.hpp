#pragma once

#include <cstddef>
#include <cstdint>

namespace kicktop {

/// Serial is the reference path; Parallel runs the same per-index body under
/// OpenMP. Bodies write only to their own output slot, so both paths produce
/// bit-identical results.
enum class Execution { serial, parallel };

/// Calls body(i) for i in [0, n).
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Execution::serial) {
    for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

/// Applies KICKTOP_NUM_THREADS from the environment, if set. Returns the
/// thread count OpenMP will use.
int configure_threads_from_env();

}  // namespace kicktop
