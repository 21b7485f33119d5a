#pragma once

#include <stdexcept>
#include <string>

namespace koopman {

// Config errors map to CLI exit code 2, numeric errors to exit code 3.
enum class ErrorKind { Config, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

#define KOOPMAN_DEFINE_ERROR(Name, Kind)                                   \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what)                             \
            : Error(ErrorKind::Kind, std::string(#Name) + ": " + what) {}  \
    }

KOOPMAN_DEFINE_ERROR(NonFiniteState, Numeric);
KOOPMAN_DEFINE_ERROR(EmptyInput, Config);
KOOPMAN_DEFINE_ERROR(UnknownPreset, Config);
KOOPMAN_DEFINE_ERROR(ShapeMismatch, Config);
KOOPMAN_DEFINE_ERROR(DegenerateClustering, Numeric);
KOOPMAN_DEFINE_ERROR(NonFiniteObservable, Numeric);
KOOPMAN_DEFINE_ERROR(InverseRoundTripFailure, Numeric);
KOOPMAN_DEFINE_ERROR(EigenSolverFailure, Numeric);
KOOPMAN_DEFINE_ERROR(NonDiagonalizable, Numeric);
KOOPMAN_DEFINE_ERROR(MissingProjector, Config);
KOOPMAN_DEFINE_ERROR(OverlappingSubspaces, Config);
KOOPMAN_DEFINE_ERROR(UnclaimedPoint, Config);
KOOPMAN_DEFINE_ERROR(AmbiguousPoint, Config);
KOOPMAN_DEFINE_ERROR(SingularRepresentation, Numeric);
KOOPMAN_DEFINE_ERROR(NonEquivariantDictionary, Config);
KOOPMAN_DEFINE_ERROR(EigenvalueMismatch, Numeric);
KOOPMAN_DEFINE_ERROR(IoError, Config);

#undef KOOPMAN_DEFINE_ERROR

} // namespace koopman
