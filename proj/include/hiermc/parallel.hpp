#pragma once

namespace hiermc::parallel {

/// Worker cap used by every OpenMP region in the library. Defaults to the
/// OpenMP runtime's maximum.
int max_threads();

/// Values < 1 reset to the runtime default.
void set_max_threads(int n);

/// Reads HIERMC_THREADS; returns the cap in effect afterwards.
int configure_from_env();

}  // namespace hiermc::parallel
