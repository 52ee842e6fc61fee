#include <entropic/errors.hpp>

namespace entropic {

const char* code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_input:
        return "INVALID_INPUT";
    case ErrorCode::invalid_loading:
        return "INVALID_LOADING";
    case ErrorCode::configuration:
        return "CONFIGURATION";
    case ErrorCode::convergence:
        return "CONVERGENCE";
    case ErrorCode::infeasible:
        return "INFEASIBLE";
    case ErrorCode::no_solution:
        return "NO_SOLUTION";
    case ErrorCode::undefined_spread:
        return "UNDEFINED_SPREAD";
    case ErrorCode::infinite_divergence:
        return "INFINITE_DIVERGENCE";
    case ErrorCode::io:
        return "IO";
    }
    return "UNKNOWN";
}

} // namespace entropic
