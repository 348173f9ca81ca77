#pragma once

#include "tempocont/angular.hpp"
#include "tempocont/random.hpp"
#include "tempocont/regressor.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace tempocont {

struct TrajectoryPoint {
    std::int64_t frame = 0;
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    double heading = 0.0;  // (-pi, pi]
};

enum class TrajectoryKind { circle, random_walk };

struct TrajectoryParams {
    double radius = 5.0;              // circle
    double speed = 1.0;               // meters per frame
    double max_heading_step = 0.1;    // random walk, radians per frame
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();  // circle center or walk start
    double start_angle = 0.0;         // circle: polar angle of the first point
    bool clockwise = false;
    std::int64_t first_frame = 0;
    /// Random walk start heading. Fixed when set; otherwise drawn from
    /// heading_mean + heading_spread * N(0, 1) when a spread is given, and
    /// uniformly on the circle when not.
    std::optional<double> initial_heading;
    double heading_mean = 0.0;
    std::optional<double> heading_spread;
};

/// Circle parameters that cover `revolutions` turns in `length` frames.
TrajectoryParams circle_params(double radius, double revolutions, std::size_t length);

std::vector<TrajectoryPoint> gen_trajectory(TrajectoryKind kind, std::size_t length, const TrajectoryParams& params,
                                            std::uint64_t seed);

struct FourierFeature {
    double omega = 1.0;
    double phase = 0.0;

    friend bool operator==(const FourierFeature&, const FourierFeature&) = default;
};

/// Appearance model: feature k = cos(omega_k * heading + phase_k), mapped
/// through `affine * raw + offset`, plus Gaussian noise.
struct DomainSpec {
    std::vector<FourierFeature> frequencies;
    Eigen::MatrixXd affine;
    Eigen::VectorXd offset;
    double noise_std = 0.0;
    std::uint64_t seed = 0;

    Eigen::Index feature_dim() const { return static_cast<Eigen::Index>(frequencies.size()); }
    void validate() const;

    friend bool operator==(const DomainSpec& a, const DomainSpec& b) {
        return a.frequencies == b.frequencies && a.affine == b.affine && a.offset == b.offset &&
               a.noise_std == b.noise_std && a.seed == b.seed;
    }
};

struct DomainOptions {
    Eigen::Index feature_dim = 16;
    int max_frequency = 3;
    double noise_std = 0.1;
};

/// Integer frequencies in [1, max_frequency] (every third feature uses 1 so
/// the map stays injective), uniform phases, identity affine.
DomainSpec make_domain(const DomainOptions& options, std::uint64_t seed);

Eigen::VectorXd render_clean(double heading, const DomainSpec& domain);
Eigen::VectorXd render_features(double heading, const DomainSpec& domain, Rng& rng);

struct ShiftOptions {
    double min_scale = 0.5;  // singular values of the extra map are drawn from [min_scale, max_scale]
    double max_scale = 2.0;
    bool rotate = false;     // false: symmetric U S U^T; true: U S V^T (features get mixed)
    double offset_std = 0.25;
    double noise_factor = 2.0;

    void validate() const;
};

/// Same frequencies; the base affine map is composed with a fresh random map
/// (condition number <= max_scale / min_scale), a random offset is added and
/// the noise is scaled by noise_factor.
DomainSpec apply_domain_shift(const DomainSpec& base, std::uint64_t shift_seed, const ShiftOptions& options = {});

struct MotionLabel {
    std::int64_t frame = 0;
    std::optional<double> heading;  // empty when the subject did not move
};

/// Heading from the displacement over +-window/2 frames; second-order
/// one-sided differences at the ends.
std::vector<MotionLabel> motion_track_label(std::span<const TrajectoryPoint> points, std::size_t window);

struct SampleSequence {
    std::int64_t id = 0;
    std::vector<std::int64_t> frames;
    Eigen::MatrixXd features;        // d x T
    Eigen::Matrix2Xd truth;          // 2 x T, ground truth (or training label where labeled)
    std::vector<std::uint8_t> labeled;

    std::size_t size() const { return frames.size(); }
    std::size_t labeled_count() const;
    std::optional<HeadingEncoding> label(std::size_t i) const;
    void validate(Eigen::Index feature_dim) const;

    friend bool operator==(const SampleSequence& a, const SampleSequence& b) {
        return a.id == b.id && a.frames == b.frames && a.features.rows() == b.features.rows() &&
               a.features.cols() == b.features.cols() && a.features == b.features && a.truth.cols() == b.truth.cols() &&
               a.truth == b.truth && a.labeled == b.labeled;
    }
};

struct Dataset {
    Eigen::Index feature_dim = 0;
    std::vector<SampleSequence> train;
    std::vector<SampleSequence> val;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class LabelSource { ground_truth, motion_track };

struct DatasetConfig {
    std::size_t train_sequences = 50;
    std::size_t val_sequences = 10;
    std::size_t sequence_length = 500;
    double label_fraction = 1.0;
    TrajectoryKind kind = TrajectoryKind::random_walk;
    TrajectoryParams trajectory;
    LabelSource label_source = LabelSource::ground_truth;
    std::size_t motion_window = 2;
    std::uint64_t seed = 0;
};

/// ceil(fraction * length), robust to representation error in `fraction`.
std::size_t labels_per_sequence(double fraction, std::size_t length);

/// Training sequences get ids [0, n), validation sequences [n, n + m);
/// every sequence has its own derived stream.
Dataset build_dataset(const DatasetConfig& config, const DomainSpec& domain);

/// Re-draws which training samples expose their label.
void relabel(Dataset& dataset, double label_fraction, std::uint64_t seed);

/// Labeled training samples only.
LabeledBatch gather_labeled(std::span<const SampleSequence> sequences);
/// Every sample with its stored truth (validation).
LabeledBatch gather_all(std::span<const SampleSequence> sequences);

inline constexpr int kDatasetVersion = 1;

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

} // namespace tempocont
