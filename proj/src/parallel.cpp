#include "mast/parallel.hpp"

#include <cstdlib>
#include <string>

#include "mast/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mast {
namespace {
int default_threads() {
#ifdef _OPENMP
  return omp_get_num_procs();
#else
  return 1;
#endif
}
}  // namespace

void set_thread_count(int threads) {
#ifdef _OPENMP
  omp_set_num_threads(threads > 0 ? threads : default_threads());
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int configure_threads_from_env() {
  const char* env = std::getenv("MAST_THREADS");
  if (env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) fail(ErrorKind::InvalidInput, std::string("bad MAST_THREADS value: ") + env);
    set_thread_count(static_cast<int>(v));
  }
  return thread_count();
}

}  // namespace mast
