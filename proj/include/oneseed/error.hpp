#pragma once

#include <stdexcept>
#include <string>

namespace oneseed {

/// Root of every error the library raises. `category()` names the error
/// kind so the CLI can print a categorized message.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* category() const noexcept { return "Error"; }
};

#define ONESEED_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what) : Error(what) {}             \
        const char* category() const noexcept override { return #Name; }   \
    };

ONESEED_DEFINE_ERROR(ParseError)
ONESEED_DEFINE_ERROR(ValidationError)
ONESEED_DEFINE_ERROR(FormatError)
ONESEED_DEFINE_ERROR(ValueError)
ONESEED_DEFINE_ERROR(CapacityError)
ONESEED_DEFINE_ERROR(RangeError)
ONESEED_DEFINE_ERROR(DimError)
ONESEED_DEFINE_ERROR(ShapeError)
ONESEED_DEFINE_ERROR(SpecError)
ONESEED_DEFINE_ERROR(CoverageError)
ONESEED_DEFINE_ERROR(SeedError)
ONESEED_DEFINE_ERROR(EmptyError)
ONESEED_DEFINE_ERROR(MissingSeedError)
ONESEED_DEFINE_ERROR(LearnerError)
ONESEED_DEFINE_ERROR(IOError)

#undef ONESEED_DEFINE_ERROR

}  // namespace oneseed
