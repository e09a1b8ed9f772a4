#pragma once

#include <stdexcept>
#include <string>

namespace gw {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedSequence : Error {
    using Error::Error;
};
struct CannotRestrict : Error {
    using Error::Error;
};
struct InsufficientMaterialization : Error {
    using Error::Error;
};
struct NotALeaf : Error {
    using Error::Error;
};
struct OutOfDomain : Error {
    using Error::Error;
};
struct DegenerateDistribution : Error {
    using Error::Error;
};
struct NotSuperCritical : Error {
    using Error::Error;
};
struct NotSubCritical : Error {
    using Error::Error;
};
struct NotCritical : Error {
    using Error::Error;
};
struct ZeroOrInfiniteMean : Error {
    using Error::Error;
};
struct ThetaOutsideInterval : Error {
    using Error::Error;
};
struct EmptyIntersection : Error {
    using Error::Error;
};
struct SupportTooLarge : Error {
    using Error::Error;
};
struct WindowUnreachable : Error {
    using Error::Error;
};
struct PropertyMismatch : Error {
    using Error::Error;
};
struct PeriodicDistribution : Error {
    using Error::Error;
};
struct InvalidDistribution : Error {
    using Error::Error;
};

}  // namespace gw
