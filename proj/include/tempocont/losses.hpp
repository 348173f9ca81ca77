#pragma once

#include "tempocont/angular.hpp"
#include "tempocont/random.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tempocont {

enum class ContinuityVariant { pairwise, triplet };

/// Scalar hyperparameters of the combined objective
///   supervised_weight * L_l + lambda * L_u.
struct LossConfig {
    double lambda = 0.1;
    double alpha = 0.5;   // per-frame similarity decay
    double margin = 0.05; // distance slack inside the pairwise hinge
    ContinuityVariant variant = ContinuityVariant::triplet;
    std::size_t triplet_samples_per_sequence = 32;
    std::int64_t near_window = 3;  // max frame gap of a sampled "near" index
    double supervised_weight = 1.0;

    void validate() const;
};

/// Index triple into a sequence with |n_anchor - n_near| < |n_anchor - n_far|.
struct Triplet {
    std::size_t anchor = 0;
    std::size_t near = 0;
    std::size_t far = 0;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Loss value plus its gradient with respect to each output column.
struct OutputLoss {
    double value = 0.0;
    Eigen::Matrix2Xd grad;
};

using Outputs = Eigen::Ref<const Eigen::Matrix2Xd>;

double supervised_loss(std::span<const HeadingEncoding> predictions, std::span<const HeadingEncoding> labels);
OutputLoss supervised_loss(const Outputs& predictions, const Outputs& labels);

/// exp(-alpha |a - b|)
double similarity(std::int64_t frame_a, std::int64_t frame_b, double alpha);

double output_distance(const HeadingEncoding& a, const HeadingEncoding& b);

/// Mean over unordered pairs i < j of S(i, j) * max(0, D(i, j) - margin).
double pairwise_continuity_loss(std::span<const HeadingEncoding> outputs, std::span<const std::int64_t> frames,
                                const LossConfig& config);
OutputLoss pairwise_continuity_loss(const Outputs& outputs, std::span<const std::int64_t> frames,
                                    const LossConfig& config);

/// Mean over triples of max(0, D(anchor, near) - D(anchor, far)).
double triplet_continuity_loss(std::span<const HeadingEncoding> outputs, std::span<const std::int64_t> frames,
                               std::span<const Triplet> triplets);
OutputLoss triplet_continuity_loss(const Outputs& outputs, std::span<const std::int64_t> frames,
                                   std::span<const Triplet> triplets);

/// Draws `count` valid triples: a uniform anchor, a near index at most
/// `near_window` frames away, and a far index with a strictly larger gap.
std::vector<Triplet> sample_triplets(std::span<const std::int64_t> frames, std::size_t count, Rng& rng,
                                     std::int64_t near_window = 3);

/// Every valid triple with near != anchor.
std::vector<Triplet> all_triplets(std::span<const std::int64_t> frames);

/// supervised + lambda * continuity
double combined_loss(double supervised, double continuity, double lambda);

} // namespace tempocont
