#pragma once

#include <cstddef>
#include <exception>
#include <utility>

namespace whitlab {

// Execution mode for the sweep kernels.  `parallel` dispatches through OpenMP
// when it was compiled in; `serial` is the reference path used by tests and
// the benchmark baseline.  Results must be identical in both modes: every
// iteration writes its own output slot and no reduction depends on order.
enum class Exec { serial, parallel };

inline Exec& default_exec() {
  static Exec mode = Exec::parallel;
  return mode;
}

template <typename Body>
void parallel_for(std::size_t count, Body&& body, Exec mode = default_exec()) {
  if (mode == Exec::serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr first_error = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(count); ++i) {
    if (first_error) continue;
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(whitlab_parallel_for_error)
      if (!first_error) first_error = std::current_exception();
    }
  }
#else
  for (std::size_t i = 0; i < count; ++i) body(i);
#endif
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace whitlab
