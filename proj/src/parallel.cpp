#include "hiermc/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace hiermc::parallel {

namespace {
std::atomic<int> thread_cap{0};
}

int max_threads() {
    int cap = thread_cap.load();
    return cap > 0 ? cap : omp_get_max_threads();
}

void set_max_threads(int n) { thread_cap.store(n > 0 ? n : 0); }

int configure_from_env() {
    if (const char* env = std::getenv("HIERMC_THREADS")) {
        try {
            set_max_threads(std::stoi(env));
        } catch (const std::exception&) {
            // unparseable value: keep runtime default
        }
    }
    return max_threads();
}

}  // namespace hiermc::parallel
