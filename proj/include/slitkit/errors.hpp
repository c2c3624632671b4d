#pragma once

#include <stdexcept>
#include <string>

namespace slitkit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SLITKIT_DEFINE_ERROR(Name)                 \
    class Name : public Error {                    \
    public:                                        \
        explicit Name(const std::string& what)     \
            : Error(#Name ": " + what) {}          \
    }

// geometry
SLITKIT_DEFINE_ERROR(NonConvergence);
SLITKIT_DEFINE_ERROR(OutOfDomain);
SLITKIT_DEFINE_ERROR(OrderTooHigh);
SLITKIT_DEFINE_ERROR(NotNormalized);
SLITKIT_DEFINE_ERROR(InvalidGeometry);

// xrpoly / neumann
SLITKIT_DEFINE_ERROR(SingularSystem);

// solver
SLITKIT_DEFINE_ERROR(MaskDegenerate);
SLITKIT_DEFINE_ERROR(SeriesUnresolved);

// expansion
SLITKIT_DEFINE_ERROR(IllConditioned);
SLITKIT_DEFINE_ERROR(InsufficientResolution);

// whitney
SLITKIT_DEFINE_ERROR(SingularMoments);
SLITKIT_DEFINE_ERROR(OutOfChart);

// neumann
SLITKIT_DEFINE_ERROR(DegenerateWeight);

// freeboundary
SLITKIT_DEFINE_ERROR(NoBracket);

// cli
SLITKIT_DEFINE_ERROR(ConfigInvalid);

#undef SLITKIT_DEFINE_ERROR

}  // namespace slitkit
