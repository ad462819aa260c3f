#pragma once

#include <stdexcept>
#include <string>

namespace asyncit {

/// Base for every error raised by the library. `kind()` is a stable name
/// used in JSON output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define ASYNCIT_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name, what) {}   \
    }

ASYNCIT_DEFINE_ERROR(SingularMatrix);
ASYNCIT_DEFINE_ERROR(NonFiniteEntries);
ASYNCIT_DEFINE_ERROR(NotSquare);
ASYNCIT_DEFINE_ERROR(DimensionMismatch);
ASYNCIT_DEFINE_ERROR(DegenerateDraw);
ASYNCIT_DEFINE_ERROR(LengthMismatch);
ASYNCIT_DEFINE_ERROR(NotContractive);
ASYNCIT_DEFINE_ERROR(NonFiniteState);
ASYNCIT_DEFINE_ERROR(NoIdleNode);
ASYNCIT_DEFINE_ERROR(DomainError);
ASYNCIT_DEFINE_ERROR(InsufficientData);
ASYNCIT_DEFINE_ERROR(NonPositiveError);
ASYNCIT_DEFINE_ERROR(ParseError);
ASYNCIT_DEFINE_ERROR(ValidationError);
ASYNCIT_DEFINE_ERROR(UnknownKey);
ASYNCIT_DEFINE_ERROR(IoError);

#undef ASYNCIT_DEFINE_ERROR

}  // namespace asyncit
