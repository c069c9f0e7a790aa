#pragma once

#include <stdexcept>
#include <string>

namespace kdn {

// Planar location in physical units.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double squared_dist(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// File / format problems. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures. The CLI maps these to exit code 1.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// A kernel row lost all of its support; the bandwidth is too small for the grid.
class DegenerateRowError : public NumericError {
public:
    explicit DegenerateRowError(const std::string& msg) : NumericError(msg) {}
};

// Unregularized normal equations are singular.
class SingularSystemError : public NumericError {
public:
    explicit SingularSystemError(const std::string& msg) : NumericError(msg) {}
};

// A pixel received zero total blending weight.
class CoverError : public NumericError {
public:
    explicit CoverError(const std::string& msg) : NumericError(msg) {}
};

} // namespace kdn
