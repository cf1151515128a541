#pragma once

#include <stdexcept>
#include <string>

namespace fpm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define FPM_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                  \
    public:                                                      \
        explicit Name(const std::string& what) : Error(what) {}  \
    }

// geometry
FPM_DEFINE_ERROR(DegenerateInput);
FPM_DEFINE_ERROR(EmptyCell);
// approximation
FPM_DEFINE_ERROR(SingularSupport);
FPM_DEFINE_ERROR(InsufficientSupport);
// problem / bench
FPM_DEFINE_ERROR(RootNotConverged);
FPM_DEFINE_ERROR(ZeroNormReference);
FPM_DEFINE_ERROR(InvalidProblem);
// assembly
FPM_DEFINE_ERROR(InvalidPenalty);
// timeint
FPM_DEFINE_ERROR(IllConditionedBasis);
FPM_DEFINE_ERROR(SingularIteration);
FPM_DEFINE_ERROR(Diverged);
// cli
FPM_DEFINE_ERROR(SchemaError);
FPM_DEFINE_ERROR(IoError);

#undef FPM_DEFINE_ERROR

/// Raised when the local iteration fails to meet its tolerance within the
/// iteration cap. Carries the last correction norm so callers can decide
/// whether to retry with a shorter interval.
class NotConverged : public Error {
public:
    NotConverged(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace fpm
