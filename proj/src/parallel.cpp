#include <entropic/parallel.hpp>

#include <cstdlib>
#include <string>

namespace entropic {

int resolve_threads(int requested) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("ENTROPIC_BESPOKE_THREADS")) {
        try {
            const int value = std::stoi(env);
            if (value > 0)
                return value;
        } catch (...) {
        }
    }
    return 1;
}

} // namespace entropic
