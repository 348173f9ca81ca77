#include "tempocont/angular.hpp"

#include "tempocont/error.hpp"

#include <cmath>
#include <string>

namespace tempocont {

namespace {

constexpr double kDegenerateNorm = 1e-12;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + ": non-finite angle");
}

template <bool Lenient>
MetricsReport evaluate_impl(const Eigen::Ref<const Eigen::Matrix2Xd>& pred,
                            const Eigen::Ref<const Eigen::Matrix2Xd>& labels) {
    if (pred.cols() != labels.cols())
        throw InvalidArgument("evaluate: " + std::to_string(pred.cols()) + " predictions vs " +
                              std::to_string(labels.cols()) + " labels");
    if (pred.cols() == 0) throw InvalidArgument("evaluate: empty input");

    MetricsReport r;
    r.n_samples = static_cast<std::size_t>(pred.cols());
    double sq = 0.0, diff = 0.0;
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < pred.cols(); ++i) {
        sq += (pred.col(i) - labels.col(i)).squaredNorm();
        const HeadingEncoding p{pred(0, i), pred(1, i)};
        const double truth = decode({labels(0, i), labels(1, i)});
        double d = kPi;
        if constexpr (Lenient) {
            if (std::hypot(p.c, p.s) < kDegenerateNorm)
                ++r.n_degenerate;
            else
                d = angle_diff(decode(p), truth);
        } else {
            d = angle_diff(decode(p), truth);
        }
        diff += d;
        if (d < kAccuracyThreshold) ++correct;
    }
    const auto n = static_cast<double>(pred.cols());
    r.mse = sq / n;
    r.mean_angle_diff = diff / n;
    r.accuracy = static_cast<double>(correct) / n;
    return r;
}

} // namespace

double wrap_angle(double theta) {
    require_finite(theta, "wrap_angle");
    double r = std::remainder(theta, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

HeadingEncoding encode(double theta) {
    require_finite(theta, "encode");
    return {std::cos(theta), std::sin(theta)};
}

double decode(const HeadingEncoding& enc) {
    if (!std::isfinite(enc.c) || !std::isfinite(enc.s)) throw InvalidArgument("decode: non-finite encoding");
    if (std::hypot(enc.c, enc.s) < kDegenerateNorm) throw DegenerateEncoding("decode: zero-length heading encoding");
    // atan2 returns -pi for (-1, -0.0); fold it onto +pi.
    const double t = std::atan2(enc.s, enc.c);
    return t == -kPi ? kPi : t;
}

double angle_diff(double a, double b) {
    require_finite(a, "angle_diff");
    require_finite(b, "angle_diff");
    return std::abs(wrap_angle(a - b));
}

MetricsReport evaluate(std::span<const HeadingEncoding> predictions, std::span<const HeadingEncoding> labels) {
    return evaluate_impl<false>(to_matrix(predictions), to_matrix(labels));
}

MetricsReport evaluate_lenient(std::span<const HeadingEncoding> predictions,
                               std::span<const HeadingEncoding> labels) {
    return evaluate_impl<true>(to_matrix(predictions), to_matrix(labels));
}

MetricsReport evaluate(const Eigen::Ref<const Eigen::Matrix2Xd>& predictions,
                       const Eigen::Ref<const Eigen::Matrix2Xd>& labels) {
    return evaluate_impl<false>(predictions, labels);
}

MetricsReport evaluate_lenient(const Eigen::Ref<const Eigen::Matrix2Xd>& predictions,
                               const Eigen::Ref<const Eigen::Matrix2Xd>& labels) {
    return evaluate_impl<true>(predictions, labels);
}

std::vector<HeadingEncoding> to_encodings(const Eigen::Ref<const Eigen::Matrix2Xd>& m) {
    std::vector<HeadingEncoding> out;
    out.reserve(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.cols(); ++i) out.push_back({m(0, i), m(1, i)});
    return out;
}

Eigen::Matrix2Xd to_matrix(std::span<const HeadingEncoding> encodings) {
    Eigen::Matrix2Xd m(2, static_cast<Eigen::Index>(encodings.size()));
    for (std::size_t i = 0; i < encodings.size(); ++i) {
        m(0, static_cast<Eigen::Index>(i)) = encodings[i].c;
        m(1, static_cast<Eigen::Index>(i)) = encodings[i].s;
    }
    return m;
}

} // namespace tempocont
