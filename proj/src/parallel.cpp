#include "fieldcorr/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "fieldcorr/error.hpp"

namespace fieldcorr {

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be >= 1");
    return *flag;
  }
  const char* env = std::getenv(kThreadsEnv);
  if (env == nullptr || *env == '\0') return 1;
  const std::string s(env);
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 1)
    throw ConfigError(std::string(kThreadsEnv) + "=\"" + s + "\" is not a positive integer");
  return v;
}

void set_threads(int threads) { omp_set_num_threads(threads); }

int max_threads() { return omp_get_max_threads(); }

}  // namespace fieldcorr
