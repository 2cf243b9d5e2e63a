#include "mimo/errors.hpp"

namespace mimo {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::NotPSD: return "NotPSD";
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::SingularGain: return "SingularGain";
        case ErrorKind::NegativeVariance: return "NegativeVariance";
        case ErrorKind::GramSingular: return "GramSingular";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    }
    return "Error";
}

}  // namespace mimo
