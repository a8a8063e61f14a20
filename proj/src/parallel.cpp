#include "epibsl/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace epibsl {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("EPIBSL_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
            // Ignore malformed values and fall through to the runtime default.
        }
    }
    return omp_get_max_threads();
}

}  // namespace epibsl
