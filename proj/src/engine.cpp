#include "wfsim/engine.hpp"

#include <cmath>

#ifdef _OPENMP
#    include <omp.h>
#endif

namespace wfsim
{
void set_thread_count(int n)
{
    if (n < 1)
        throw ArgumentError("thread count must be positive");
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
}

int thread_count()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

double MeanAccumulator::stderr_mean() const
{
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

}  // namespace wfsim
