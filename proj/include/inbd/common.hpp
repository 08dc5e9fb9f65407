#ifndef INBD_COMMON_HPP
#define INBD_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace inbd {

using real = double;

inline constexpr real PI = 3.14159265358979323846;

// Minimum angular resolution of a polar grid. Prevents degenerate grids
// around very small center rings.
inline constexpr int M_MIN = 16;

struct EmptyMask : std::runtime_error {
    explicit EmptyMask(const std::string& m = "mask has no positive pixels") : std::runtime_error(m) {}
};
struct NoBoundaryAhead : std::runtime_error {
    explicit NoBoundaryAhead(const std::string& m = "no boundary pixels ahead of current ring") : std::runtime_error(m) {}
};
struct AllUndefined : std::runtime_error {
    explicit AllUndefined(const std::string& m = "all entries undefined") : std::runtime_error(m) {}
};
struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& m = "shape mismatch") : std::runtime_error(m) {}
};
struct BadKernel : std::runtime_error {
    explicit BadKernel(const std::string& m = "invalid kernel for circular convolution") : std::runtime_error(m) {}
};
struct TooSmall : std::runtime_error {
    explicit TooSmall(const std::string& m = "input too small") : std::runtime_error(m) {}
};
struct ConfigInvalid : std::runtime_error {
    explicit ConfigInvalid(const std::string& m = "invalid configuration") : std::runtime_error(m) {}
};
struct NonFiniteGradient : std::runtime_error {
    explicit NonFiniteGradient(const std::string& m = "non-finite gradient") : std::runtime_error(m) {}
};
struct NoGroundTruth : std::runtime_error {
    explicit NoGroundTruth(const std::string& m = "no ground truth instances") : std::runtime_error(m) {}
};
struct EmptyForeground : std::runtime_error {
    explicit EmptyForeground(const std::string& m = "no foreground pixels") : std::runtime_error(m) {}
};
struct IOError : std::runtime_error {
    explicit IOError(const std::string& m) : std::runtime_error(m) {}
};
struct DatasetError : std::runtime_error {
    explicit DatasetError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace inbd

#endif
