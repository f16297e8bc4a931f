#pragma once

#include <stdexcept>
#include <string>

namespace hybridsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HYBRIDSIM_ERROR(Name)                      \
    class Name : public Error {                    \
    public:                                        \
        explicit Name(const std::string& what)     \
            : Error(std::string(#Name ": ") + what) \
        {}                                         \
    }

HYBRIDSIM_ERROR(InvalidParameter);
HYBRIDSIM_ERROR(EmptyInput);
HYBRIDSIM_ERROR(LabelMismatch);
HYBRIDSIM_ERROR(StratumTooSmall);
HYBRIDSIM_ERROR(EmptyArm);
HYBRIDSIM_ERROR(NoTreatedInValidation);
HYBRIDSIM_ERROR(NoRctControlsInValidation);
HYBRIDSIM_ERROR(EstimationFailure);
HYBRIDSIM_ERROR(ConfigError);
HYBRIDSIM_ERROR(IoError);

#undef HYBRIDSIM_ERROR

}  // namespace hybridsim
