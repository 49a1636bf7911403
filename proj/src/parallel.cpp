#include "exitlaw/parallel.hpp"

#include <cstdlib>
#include <string>

namespace exitlaw {

std::size_t worker_count() {
  if (const char* env = std::getenv("EXITLAW_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace exitlaw
