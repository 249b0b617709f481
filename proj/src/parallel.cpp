#include "smore/parallel.hpp"

#ifdef SMORE_HAVE_OPENMP
#include <omp.h>
#endif

namespace smore {

int resolve_threads(int requested) {
#ifdef SMORE_HAVE_OPENMP
    if (requested > 0) return requested;
    return omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

bool parallel_enabled() {
#ifdef SMORE_HAVE_OPENMP
    return true;
#else
    return false;
#endif
}

}  // namespace smore
