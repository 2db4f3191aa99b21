#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace mast {

/// Caps the OpenMP team size used by the parallel kernels. 0 restores the
/// runtime default.
void set_thread_count(int threads);
int thread_count();

/// Applies MAST_THREADS from the environment (0 or unset = auto). Returns the
/// effective thread count. Throws InvalidInput on a malformed value.
int configure_threads_from_env();

/// OpenMP loop over [0, n) whose body may throw; the first exception is
/// rethrown on the calling thread after the loop.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace mast
