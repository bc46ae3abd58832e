#pragma once

#include <optional>

namespace fieldcorr {

inline constexpr const char* kThreadsEnv = "FIELD_CORRESPOND_THREADS";

/// Thread count from the flag, else the environment variable, else 1.
/// Throws ConfigError for values below 1 or unparsable text.
int resolve_threads(std::optional<int> flag);

/// Sets the OpenMP team size used by the kernels.
void set_threads(int threads);
int max_threads();

}  // namespace fieldcorr
