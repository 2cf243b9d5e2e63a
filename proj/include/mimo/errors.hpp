#pragma once

#include <stdexcept>
#include <string>

namespace mimo {

enum class ErrorKind {
    NotPSD,
    Singular,
    RankDeficient,
    SingularGain,
    NegativeVariance,
    GramSingular,
    DegenerateDenominator,
    ConfigError,
    QuadratureFailure,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
public:
    explicit TypedError(const std::string& what) : Error(K, what) {}
};

using NotPSD = TypedError<ErrorKind::NotPSD>;
using Singular = TypedError<ErrorKind::Singular>;
using RankDeficient = TypedError<ErrorKind::RankDeficient>;
using SingularGain = TypedError<ErrorKind::SingularGain>;
using NegativeVariance = TypedError<ErrorKind::NegativeVariance>;
using GramSingular = TypedError<ErrorKind::GramSingular>;
using DegenerateDenominator = TypedError<ErrorKind::DegenerateDenominator>;
using ConfigError = TypedError<ErrorKind::ConfigError>;
using QuadratureFailure = TypedError<ErrorKind::QuadratureFailure>;

}  // namespace mimo
