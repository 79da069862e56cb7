#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvn {

using cd = std::complex<double>;
using CMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool valid() const { return lo <= hi; }
};

struct IntInterval {
    int lo = 0;
    int hi = 0;
    [[nodiscard]] bool valid() const { return lo <= hi; }
};

/// Decibel quantity kept distinct from linear ratios at API boundaries.
struct Decibel {
    double value = 0.0;
    [[nodiscard]] double linear_power() const { return std::pow(10.0, value / 10.0); }
};

/// Raised for invalid configurations; experiments abort on these.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an estimator cannot produce a result for the given data; trials record a miss.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline cd expj(double phase) { return {std::cos(phase), std::sin(phase)}; }

}  // namespace pvn
