#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace tempocont {

inline constexpr double kPi = std::numbers::pi;

/// Accuracy threshold: a prediction is correct when its angular error is
/// strictly below pi/8.
inline constexpr double kAccuracyThreshold = kPi / 8.0;

/// (cos, sin) pair. Built from an angle it is unit norm; raw regressor
/// outputs are stored here as well and carry no norm constraint.
struct HeadingEncoding {
    double c = 0.0;
    double s = 0.0;

    Eigen::Vector2d vec() const { return {c, s}; }
    static HeadingEncoding from(const Eigen::Ref<const Eigen::Vector2d>& v) { return {v(0), v(1)}; }

    friend bool operator==(const HeadingEncoding&, const HeadingEncoding&) = default;
};

struct MetricsReport {
    double mse = 0.0;
    double mean_angle_diff = 0.0;  // radians, mean (not median)
    double accuracy = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_degenerate = 0;  // predictions with no defined angle

    bool degenerate() const noexcept { return n_degenerate > 0; }
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

HeadingEncoding encode(double theta);

/// atan2(s, c) in (-pi, pi]. Throws DegenerateEncoding when |(c, s)| < 1e-12.
double decode(const HeadingEncoding& enc);

/// Wrapped absolute difference in [0, pi].
double angle_diff(double a, double b);

/// MSE over both components, mean AngleDiff and Accuracy@pi/8.
/// Throws DegenerateEncoding if any prediction cannot be decoded.
MetricsReport evaluate(std::span<const HeadingEncoding> predictions, std::span<const HeadingEncoding> labels);

/// Same metrics, but undecodable predictions count as wrong with an angular
/// error of pi and are tallied in `n_degenerate` instead of throwing.
MetricsReport evaluate_lenient(std::span<const HeadingEncoding> predictions,
                               std::span<const HeadingEncoding> labels);

/// Column-wise variants over 2xN matrices (row 0 = cos, row 1 = sin).
MetricsReport evaluate(const Eigen::Ref<const Eigen::Matrix2Xd>& predictions,
                       const Eigen::Ref<const Eigen::Matrix2Xd>& labels);
MetricsReport evaluate_lenient(const Eigen::Ref<const Eigen::Matrix2Xd>& predictions,
                               const Eigen::Ref<const Eigen::Matrix2Xd>& labels);

std::vector<HeadingEncoding> to_encodings(const Eigen::Ref<const Eigen::Matrix2Xd>& m);
Eigen::Matrix2Xd to_matrix(std::span<const HeadingEncoding> encodings);

} // namespace tempocont
