#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mccdma {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using Bits = std::vector<std::uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised when an operation's inputs violate its preconditions.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidParameter(message);
}

}  // namespace mccdma
