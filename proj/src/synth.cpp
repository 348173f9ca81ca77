#include "tempocont/synth.hpp"

#include "tempocont/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tempocont {

namespace {

enum : std::uint64_t { kTrainSet = 0, kValSet = 1 };
enum : std::uint64_t { kTrajectoryStream = 1, kRenderStream = 2, kLabelStream = 3 };

Eigen::MatrixXd random_orthogonal(Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

// First k entries of a uniform random permutation of `pool`.
std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

void mark_labels(SampleSequence& seq, double fraction, Rng& rng) {
    std::vector<std::size_t> pool(seq.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::fill(seq.labeled.begin(), seq.labeled.end(), std::uint8_t{0});
    for (auto i : choose(std::move(pool), labels_per_sequence(fraction, seq.size()), rng)) seq.labeled[i] = 1;
}

void require_fraction(double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("label fraction must lie in [0, 1]");
}

} // namespace

TrajectoryParams circle_params(double radius, double revolutions, std::size_t length) {
    if (!(radius > 0.0) || length == 0) throw InvalidArgument("circle_params: radius and length must be positive");
    TrajectoryParams p;
    p.radius = radius;
    p.speed = 2.0 * kPi * radius * revolutions / static_cast<double>(length);
    return p;
}

std::vector<TrajectoryPoint> gen_trajectory(TrajectoryKind kind, std::size_t length, const TrajectoryParams& params,
                                            std::uint64_t seed) {
    if (length < 2) throw InvalidArgument("gen_trajectory: length must be >= 2");
    if (!(params.speed > 0.0)) throw InvalidArgument("gen_trajectory: speed must be positive");

    std::vector<TrajectoryPoint> out(length);
    if (kind == TrajectoryKind::circle) {
        if (!(params.radius > 0.0)) throw InvalidArgument("gen_trajectory: radius must be positive");
        const double step = (params.clockwise ? -1.0 : 1.0) * params.speed / params.radius;
        const double turn = params.clockwise ? -kPi / 2.0 : kPi / 2.0;
        for (std::size_t t = 0; t < length; ++t) {
            const double phi = params.start_angle + step * static_cast<double>(t);
            out[t].frame = params.first_frame + static_cast<std::int64_t>(t);
            out[t].position = params.origin + params.radius * Eigen::Vector2d(std::cos(phi), std::sin(phi));
            out[t].heading = wrap_angle(phi + turn);
        }
        return out;
    }

    if (!(params.max_heading_step >= 0.0)) throw InvalidArgument("gen_trajectory: max_heading_step must be >= 0");
    Rng rng(derive_seed(seed, {kTrajectoryStream}));
    double heading = 0.0;
    if (params.initial_heading)
        heading = wrap_angle(*params.initial_heading);
    else if (params.heading_spread)
        heading = wrap_angle(params.heading_mean + *params.heading_spread * rng.normal());
    else
        heading = wrap_angle(rng.uniform(-kPi, kPi));
    Eigen::Vector2d pos = params.origin;
    for (std::size_t t = 0; t < length; ++t) {
        if (t > 0) {
            pos += params.speed * Eigen::Vector2d(std::cos(heading), std::sin(heading));
            heading = wrap_angle(heading + rng.uniform(-params.max_heading_step, params.max_heading_step));
        }
        out[t] = {params.first_frame + static_cast<std::int64_t>(t), pos, heading};
    }
    return out;
}

void DomainSpec::validate() const {
    const Eigen::Index d = feature_dim();
    if (d < 1) throw InvalidArgument("domain: no features");
    if (affine.rows() != d || affine.cols() != d) throw InvalidArgument("domain: affine map must be d x d");
    if (offset.size() != d) throw InvalidArgument("domain: offset must have d entries");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw InvalidArgument("domain: noise_std must be >= 0");
}

DomainSpec make_domain(const DomainOptions& options, std::uint64_t seed) {
    if (options.feature_dim < 1) throw InvalidArgument("make_domain: feature_dim must be >= 1");
    if (options.max_frequency < 1) throw InvalidArgument("make_domain: max_frequency must be >= 1");
    Rng rng(derive_seed(seed, {0xd0}));
    DomainSpec d;
    d.seed = seed;
    d.noise_std = options.noise_std;
    for (Eigen::Index k = 0; k < options.feature_dim; ++k) {
        const double omega =
            k % 3 == 0 ? 1.0 : static_cast<double>(1 + rng.index(static_cast<std::uint64_t>(options.max_frequency)));
        d.frequencies.push_back({omega, rng.uniform(0.0, 2.0 * kPi)});
    }
    d.affine = Eigen::MatrixXd::Identity(options.feature_dim, options.feature_dim);
    d.offset = Eigen::VectorXd::Zero(options.feature_dim);
    d.validate();
    return d;
}

Eigen::VectorXd render_clean(double heading, const DomainSpec& domain) {
    Eigen::VectorXd raw(domain.feature_dim());
    for (Eigen::Index k = 0; k < raw.size(); ++k) {
        const auto& f = domain.frequencies[static_cast<std::size_t>(k)];
        raw(k) = std::cos(f.omega * heading + f.phase);
    }
    return domain.affine * raw + domain.offset;
}

Eigen::VectorXd render_features(double heading, const DomainSpec& domain, Rng& rng) {
    Eigen::VectorXd x = render_clean(heading, domain);
    if (domain.noise_std > 0.0)
        for (Eigen::Index k = 0; k < x.size(); ++k) x(k) += domain.noise_std * rng.normal();
    return x;
}

void ShiftOptions::validate() const {
    if (!(min_scale > 0.0) || !(max_scale >= min_scale) || !std::isfinite(max_scale))
        throw InvalidArgument("ShiftOptions: need 0 < min_scale <= max_scale");
    if (!(offset_std >= 0.0) || !std::isfinite(offset_std)) throw InvalidArgument("ShiftOptions: bad offset_std");
    if (!(noise_factor >= 0.0) || !std::isfinite(noise_factor)) throw InvalidArgument("ShiftOptions: bad noise_factor");
}

DomainSpec apply_domain_shift(const DomainSpec& base, std::uint64_t shift_seed, const ShiftOptions& options) {
    base.validate();
    options.validate();
    const Eigen::Index d = base.feature_dim();
    Rng rng(derive_seed(shift_seed, {0x5a1f7}));
    const Eigen::MatrixXd u = random_orthogonal(d, rng);
    const Eigen::MatrixXd v = options.rotate ? random_orthogonal(d, rng) : u;
    Eigen::VectorXd sv(d);
    for (Eigen::Index k = 0; k < d; ++k) sv(k) = rng.uniform(options.min_scale, options.max_scale);
    DomainSpec shifted = base;
    shifted.affine = u * sv.asDiagonal() * v.transpose() * base.affine;
    for (Eigen::Index k = 0; k < d; ++k) shifted.offset(k) += options.offset_std * rng.normal();
    shifted.noise_std = options.noise_factor * base.noise_std;
    return shifted;
}

std::vector<MotionLabel> motion_track_label(std::span<const TrajectoryPoint> points, std::size_t window) {
    const std::size_t n = points.size();
    if (window < 1) throw InvalidArgument("motion_track_label: window must be >= 1");
    const std::size_t half = std::max<std::size_t>(1, window / 2);
    if (n < window + 1 || n < 2 * half + 1)
        throw InvalidArgument("motion_track_label: need at least window + 1 points");

    auto p = [&](std::size_t i) -> const Eigen::Vector2d& { return points[i].position; };
    std::vector<MotionLabel> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        Eigen::Vector2d disp;
        if (t >= half && t + half < n)
            disp = p(t + half) - p(t - half);
        else if (t < half)
            disp = t + 2 * half < n ? Eigen::Vector2d(-3.0 * p(t) + 4.0 * p(t + half) - p(t + 2 * half))
                                    : Eigen::Vector2d(p(t + half) - p(t));
        else
            disp = t >= 2 * half ? Eigen::Vector2d(3.0 * p(t) - 4.0 * p(t - half) + p(t - 2 * half))
                                 : Eigen::Vector2d(p(t) - p(t - half));
        out[t].frame = points[t].frame;
        if (disp.norm() >= 1e-9) out[t].heading = decode({disp.x(), disp.y()});
    }
    return out;
}

std::size_t SampleSequence::labeled_count() const {
    return static_cast<std::size_t>(std::count(labeled.begin(), labeled.end(), std::uint8_t{1}));
}

std::optional<HeadingEncoding> SampleSequence::label(std::size_t i) const {
    if (!labeled.at(i)) return std::nullopt;
    const auto c = static_cast<Eigen::Index>(i);
    return HeadingEncoding{truth(0, c), truth(1, c)};
}

void SampleSequence::validate(Eigen::Index feature_dim) const {
    const auto n = static_cast<Eigen::Index>(frames.size());
    if (features.rows() != feature_dim || features.cols() != n || truth.cols() != n ||
        labeled.size() != frames.size())
        throw InvalidArgument("sequence " + std::to_string(id) + ": inconsistent array sizes");
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (frames[i] <= frames[i - 1])
            throw InvalidArgument("sequence " + std::to_string(id) + ": frames must strictly increase");
}

std::size_t labels_per_sequence(double fraction, std::size_t length) {
    require_fraction(fraction);
    const double exact = fraction * static_cast<double>(length);
    return std::min(length, static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact))));
}

Dataset build_dataset(const DatasetConfig& config, const DomainSpec& domain) {
    domain.validate();
    require_fraction(config.label_fraction);
    if (config.train_sequences == 0) throw InvalidArgument("build_dataset: zero training sequences");
    if (config.sequence_length < 3) throw InvalidArgument("build_dataset: sequence_length must be >= 3");

    Dataset ds;
    ds.feature_dim = domain.feature_dim();
    const auto make = [&](std::uint64_t set, std::size_t index, std::int64_t id) {
        const auto traj = gen_trajectory(config.kind, config.sequence_length, config.trajectory,
                                         derive_seed(config.seed, {set, index, kTrajectoryStream}));
        Rng render(derive_seed(config.seed, {set, index, kRenderStream}));
        SampleSequence seq;
        seq.id = id;
        const auto n = static_cast<Eigen::Index>(traj.size());
        seq.features.resize(ds.feature_dim, n);
        seq.truth.resize(2, n);
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto& pt = traj[static_cast<std::size_t>(t)];
            seq.frames.push_back(pt.frame);
            seq.features.col(t) = render_features(pt.heading, domain, render);
            seq.truth.col(t) = encode(pt.heading).vec();
        }
        seq.labeled.assign(traj.size(), 0);

        if (set == kValSet) {
            std::fill(seq.labeled.begin(), seq.labeled.end(), std::uint8_t{1});
            return seq;
        }
        Rng pick(derive_seed(config.seed, {set, index, kLabelStream}));
        if (config.label_source == LabelSource::ground_truth) {
            mark_labels(seq, config.label_fraction, pick);
        } else {
            // Auto-labels: stationary frames are never eligible.
            const auto labels = motion_track_label(traj, config.motion_window);
            std::vector<std::size_t> valid;
            for (std::size_t t = 0; t < labels.size(); ++t)
                if (labels[t].heading) valid.push_back(t);
            for (auto t : choose(std::move(valid), labels_per_sequence(config.label_fraction, traj.size()), pick)) {
                seq.labeled[t] = 1;
                seq.truth.col(static_cast<Eigen::Index>(t)) = encode(*labels[t].heading).vec();
            }
        }
        return seq;
    };

    for (std::size_t i = 0; i < config.train_sequences; ++i)
        ds.train.push_back(make(kTrainSet, i, static_cast<std::int64_t>(i)));
    for (std::size_t i = 0; i < config.val_sequences; ++i)
        ds.val.push_back(make(kValSet, i, static_cast<std::int64_t>(config.train_sequences + i)));
    return ds;
}

void relabel(Dataset& dataset, double label_fraction, std::uint64_t seed) {
    require_fraction(label_fraction);
    for (auto& seq : dataset.train) {
        Rng pick(derive_seed(seed, {0x1abe1, static_cast<std::uint64_t>(seq.id)}));
        mark_labels(seq, label_fraction, pick);
    }
}

namespace {

template <bool LabeledOnly>
LabeledBatch gather(std::span<const SampleSequence> sequences) {
    Eigen::Index n = 0, d = 0;
    for (const auto& s : sequences) {
        n += static_cast<Eigen::Index>(LabeledOnly ? s.labeled_count() : s.size());
        d = s.features.rows();
    }
    LabeledBatch b{Eigen::MatrixXd(d, n), Eigen::Matrix2Xd(2, n)};
    Eigen::Index k = 0;
    for (const auto& s : sequences)
        for (std::size_t t = 0; t < s.size(); ++t) {
            if (LabeledOnly && !s.labeled[t]) continue;
            const auto c = static_cast<Eigen::Index>(t);
            b.features.col(k) = s.features.col(c);
            b.labels.col(k) = s.truth.col(c);
            ++k;
        }
    return b;
}

} // namespace

LabeledBatch gather_labeled(std::span<const SampleSequence> sequences) { return gather<true>(sequences); }

LabeledBatch gather_all(std::span<const SampleSequence> sequences) { return gather<false>(sequences); }

} // namespace tempocont
