#pragma once

#include <stdexcept>
#include <string>

namespace sechyp {

// Base for all numerical/configuration failures raised by the library.
// `kind()` is a stable identifier used by the CLI exit-code mapping.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define SECHYP_ERROR(Name)                                        \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& msg) : Error(#Name, msg) {} \
    }

SECHYP_ERROR(BlowUp);
SECHYP_ERROR(StepSizeUnderflow);
SECHYP_ERROR(ConfigError);
SECHYP_ERROR(DegenerateFrame);
SECHYP_ERROR(SplitFail);
SECHYP_ERROR(CoverFail);
SECHYP_ERROR(InsufficientRange);
SECHYP_ERROR(FoliationFail);
SECHYP_ERROR(ApertureExceeded);
SECHYP_ERROR(OutOfSection);
SECHYP_ERROR(SplitUnresolvable);
SECHYP_ERROR(Nontermination);
SECHYP_ERROR(DensityLost);
SECHYP_ERROR(GridMiss);
SECHYP_ERROR(DictMismatch);

#undef SECHYP_ERROR

// Raised when no section crossing is found up to t = t_max; carries the horizon.
class NoReturn : public Error {
public:
    NoReturn(double t_max, const std::string& msg)
        : Error("NoReturn", msg), t_max_(t_max) {}
    double t_max() const { return t_max_; }

private:
    double t_max_;
};

} // namespace sechyp
