#include "cofipara/common.hpp"

#include <chrono>
#include <cstdlib>

namespace cofipara {

std::int64_t current_time_seconds() {
    if (const char* fixed = std::getenv("COFIPARA_FIXED_TIME")) {
        return std::strtoll(fixed, nullptr, 10);
    }
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace cofipara
