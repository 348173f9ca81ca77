#include "tempocont/losses.hpp"

#include "tempocont/error.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace tempocont {

namespace {

void require_frames(std::span<const std::int64_t> frames, Eigen::Index n, const char* what) {
    if (static_cast<Eigen::Index>(frames.size()) != n)
        throw InvalidArgument(std::string(what) + ": " + std::to_string(n) + " outputs vs " +
                              std::to_string(frames.size()) + " frames");
}

std::int64_t gap(std::span<const std::int64_t> frames, std::size_t a, std::size_t b) {
    return std::abs(frames[a] - frames[b]);
}

// Euclidean distance between two output columns, evaluated as
// sqrt(dc^2 + ds^2) so every loss agrees with a per-pair recount.
double column_distance(const Outputs& out, Eigen::Index a, Eigen::Index b) {
    const double dc = out(0, a) - out(0, b);
    const double ds = out(1, a) - out(1, b);
    return std::sqrt(dc * dc + ds * ds);
}

// Adds dD/da to column a and dD/db to column b, scaled by w.
// The subgradient at D = 0 is taken as zero.
void accumulate_distance_grad(Eigen::Matrix2Xd& grad, const Outputs& out, Eigen::Index a, Eigen::Index b,
                              double dist, double w) {
    if (dist <= 0.0) return;
    const Eigen::Vector2d g = (w / dist) * (out.col(a) - out.col(b));
    grad.col(a) += g;
    grad.col(b) -= g;
}

} // namespace

void LossConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be finite and > 0");
    if (!(margin >= 0.0) || !std::isfinite(margin)) throw InvalidArgument("margin must be finite and >= 0");
    if (!(supervised_weight >= 0.0) || !std::isfinite(supervised_weight))
        throw InvalidArgument("supervised weight must be finite and >= 0");
    if (variant == ContinuityVariant::triplet && triplet_samples_per_sequence < 1)
        throw InvalidArgument("triplet_samples_per_sequence must be >= 1");
    if (near_window < 1) throw InvalidArgument("near_window must be >= 1");
}

double supervised_loss(std::span<const HeadingEncoding> predictions, std::span<const HeadingEncoding> labels) {
    return supervised_loss(to_matrix(predictions), to_matrix(labels)).value;
}

OutputLoss supervised_loss(const Outputs& predictions, const Outputs& labels) {
    if (predictions.cols() != labels.cols())
        throw InvalidArgument("supervised_loss: " + std::to_string(predictions.cols()) + " predictions vs " +
                              std::to_string(labels.cols()) + " labels");
    if (predictions.cols() == 0) throw InvalidArgument("supervised_loss: empty batch");
    const double n = static_cast<double>(predictions.cols());
    const Eigen::Matrix2Xd residual = predictions - labels;
    double sum = 0.0;  // sequential per-sample sum
    for (Eigen::Index i = 0; i < residual.cols(); ++i)
        sum += residual(0, i) * residual(0, i) + residual(1, i) * residual(1, i);
    return {sum / n, (2.0 / n) * residual};
}

double similarity(std::int64_t frame_a, std::int64_t frame_b, double alpha) {
    if (!(alpha > 0.0)) throw InvalidArgument("similarity: alpha must be > 0");
    return std::exp(-alpha * static_cast<double>(std::abs(frame_a - frame_b)));
}

double output_distance(const HeadingEncoding& a, const HeadingEncoding& b) {
    const double dc = a.c - b.c, ds = a.s - b.s;
    return std::sqrt(dc * dc + ds * ds);
}

double pairwise_continuity_loss(std::span<const HeadingEncoding> outputs, std::span<const std::int64_t> frames,
                                const LossConfig& config) {
    return pairwise_continuity_loss(to_matrix(outputs), frames, config).value;
}

OutputLoss pairwise_continuity_loss(const Outputs& outputs, std::span<const std::int64_t> frames,
                                    const LossConfig& config) {
    const Eigen::Index n = outputs.cols();
    require_frames(frames, n, "pairwise_continuity_loss");
    if (n < 2) throw InvalidArgument("pairwise_continuity_loss: sequence shorter than 2");

    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    OutputLoss r{0.0, Eigen::Matrix2Xd::Zero(2, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = column_distance(outputs, i, j);
            if (d <= config.margin) continue;
            const double s = similarity(frames[static_cast<std::size_t>(i)], frames[static_cast<std::size_t>(j)],
                                        config.alpha);
            r.value += s * (d - config.margin);
            accumulate_distance_grad(r.grad, outputs, i, j, d, s / pairs);
        }
    }
    r.value /= pairs;
    return r;
}

double triplet_continuity_loss(std::span<const HeadingEncoding> outputs, std::span<const std::int64_t> frames,
                               std::span<const Triplet> triplets) {
    return triplet_continuity_loss(to_matrix(outputs), frames, triplets).value;
}

OutputLoss triplet_continuity_loss(const Outputs& outputs, std::span<const std::int64_t> frames,
                                   std::span<const Triplet> triplets) {
    const Eigen::Index n = outputs.cols();
    require_frames(frames, n, "triplet_continuity_loss");
    if (n < 3) throw InvalidArgument("triplet_continuity_loss: sequence shorter than 3");
    if (triplets.empty()) throw InvalidArgument("triplet_continuity_loss: empty triplet list");

    const auto size = static_cast<std::size_t>(n);
    for (const auto& t : triplets) {
        if (t.anchor >= size || t.near >= size || t.far >= size)
            throw InvalidArgument("triplet_continuity_loss: index out of range");
        if (!(gap(frames, t.anchor, t.near) < gap(frames, t.anchor, t.far)))
            throw InvalidArgument("triplet_continuity_loss: near gap must be strictly smaller than far gap");
    }

    const double w = 1.0 / static_cast<double>(triplets.size());
    OutputLoss r{0.0, Eigen::Matrix2Xd::Zero(2, n)};
    for (const auto& t : triplets) {
        const auto a = static_cast<Eigen::Index>(t.anchor);
        const auto b = static_cast<Eigen::Index>(t.near);
        const auto c = static_cast<Eigen::Index>(t.far);
        const double d_near = column_distance(outputs, a, b);
        const double d_far = column_distance(outputs, a, c);
        if (d_near <= d_far) continue;
        r.value += d_near - d_far;
        accumulate_distance_grad(r.grad, outputs, a, b, d_near, w);
        accumulate_distance_grad(r.grad, outputs, a, c, d_far, -w);
    }
    r.value /= static_cast<double>(triplets.size());
    return r;
}

std::vector<Triplet> sample_triplets(std::span<const std::int64_t> frames, std::size_t count, Rng& rng,
                                     std::int64_t near_window) {
    const std::size_t n = frames.size();
    if (n < 3) throw InvalidArgument("sample_triplets: sequence shorter than 3");
    if (near_window < 1) throw InvalidArgument("sample_triplets: near_window must be >= 1");

    // An anchor is usable when some near candidate has a gap below the
    // anchor's largest gap, so that a far index exists.
    std::vector<std::size_t> anchors;
    for (std::size_t a = 0; a < n; ++a) {
        const std::int64_t max_gap = std::max(gap(frames, a, 0), gap(frames, a, n - 1));
        for (std::size_t j = 0; j < n; ++j) {
            const auto g = gap(frames, a, j);
            if (j != a && g <= near_window && g < max_gap) {
                anchors.push_back(a);
                break;
            }
        }
    }
    if (anchors.empty()) throw InvalidArgument("sample_triplets: no valid triplet in sequence");

    std::vector<Triplet> out;
    out.reserve(count);
    std::vector<std::size_t> candidates;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t a = anchors[rng.index(anchors.size())];
        const std::int64_t max_gap = std::max(gap(frames, a, 0), gap(frames, a, n - 1));

        candidates.clear();
        for (std::size_t j = 0; j < n; ++j) {
            const auto g = gap(frames, a, j);
            if (j != a && g <= near_window && g < max_gap) candidates.push_back(j);
        }
        const std::size_t near = candidates[rng.index(candidates.size())];
        const std::int64_t near_gap = gap(frames, a, near);

        candidates.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (gap(frames, a, j) > near_gap) candidates.push_back(j);
        const std::size_t far = candidates[rng.index(candidates.size())];
        out.push_back({a, near, far});
    }
    return out;
}

std::vector<Triplet> all_triplets(std::span<const std::int64_t> frames) {
    std::vector<Triplet> out;
    const std::size_t n = frames.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a) continue;
            for (std::size_t c = 0; c < n; ++c)
                if (gap(frames, a, b) < gap(frames, a, c)) out.push_back({a, b, c});
        }
    return out;
}

double combined_loss(double supervised, double continuity, double lambda) {
    if (!std::isfinite(supervised) || !std::isfinite(continuity) || !std::isfinite(lambda))
        throw InvalidArgument("combined_loss: non-finite input");
    if (supervised < 0.0 || continuity < 0.0 || lambda < 0.0)
        throw InvalidArgument("combined_loss: negative input");
    return supervised + lambda * continuity;
}

} // namespace tempocont
