#include "pgg/errors.hpp"

namespace pgg {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::unsupported_dimension: return "unsupported-dimension";
        case ErrorCode::exhaustion: return "exhaustion";
        case ErrorCode::invalid_action: return "invalid-action";
        case ErrorCode::mechanism_disabled: return "mechanism-disabled";
        case ErrorCode::insufficient_balance: return "insufficient-balance";
        case ErrorCode::invalid_target: return "invalid-target";
        case ErrorCode::undefined_measure: return "undefined-measure";
        case ErrorCode::se_undefined: return "se-undefined";
        case ErrorCode::infinite_weight: return "infinite-weight";
        case ErrorCode::undefined_test: return "undefined-test";
        case ErrorCode::singular_design: return "singular-design";
        case ErrorCode::not_converged: return "not-converged";
        case ErrorCode::unsupported_model: return "unsupported-model";
        case ErrorCode::ingestion: return "ingestion";
        case ErrorCode::usage: return "usage";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

}  // namespace pgg
