#include "jkit/errors.hpp"

#include <cstdlib>
#include <cstring>

namespace jkit {

std::size_t max_terms() {
    static const std::size_t value = [] {
        const char* env = std::getenv("JKIT_MAX_TERMS");
        if (env != nullptr && std::strlen(env) > 0) {
            char* end = nullptr;
            unsigned long long v = std::strtoull(env, &end, 10);
            if (end != nullptr && *end == '\0' && v > 0)
                return static_cast<std::size_t>(v);
        }
        return static_cast<std::size_t>(1000000);
    }();
    return value;
}

}  // namespace jkit
