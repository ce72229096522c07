#ifndef NOVIKOV_ERRORS_HPP
#define NOVIKOV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace novikov {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Surface/spec parsing problems.
struct ParseError : Error { using Error::Error; };

// Critical-point search found different point sets on the two seed grids.
struct SeedExhaustion : Error { using Error::Error; };

// classify_critical was handed a point that is not critical.
struct NotCritical : Error { using Error::Error; };

// Orbit tracing exceeded its arc-length budget without closing.
struct MaxArcLength : Error { using Error::Error; };

// Newton projection back onto the surface diverged.
struct ProjectionFailure : Error { using Error::Error; };

// A separatrix branch ran out of arc without being captured by a saddle.
struct DanglingSeparatrix : Error { using Error::Error; };

// A lift displacement was not an integer multiple of 2*pi within tolerance.
struct NonIntegral : Error { using Error::Error; };

struct ZeroVector : Error { using Error::Error; };

// A lattice generator was not orthogonal to the direction vector.
struct InvalidGenerator : Error { using Error::Error; };

// Dimension fit had fewer than two usable scales.
struct DegenerateInput : Error { using Error::Error; };

// Degenerate critical point defeated branch detection.
struct DegenerateFailure : Error { using Error::Error; };

struct PreconditionViolation : Error { using Error::Error; };

}  // namespace novikov

#endif
