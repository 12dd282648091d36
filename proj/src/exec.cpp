#include "ergo/exec.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ergo {

namespace {
Exec g_default = Exec::parallel;
}

Exec default_exec() { return g_default; }
void set_default_exec(Exec mode) { g_default = mode; }

int exec_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_exec_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace ergo
