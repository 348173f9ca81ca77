#pragma once

#include "tempocont/angular.hpp"
#include "tempocont/error.hpp"
#include "tempocont/losses.hpp"
#include "tempocont/random.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace tempocont {

enum class Activation { tanh, relu };

struct RegressorConfig {
    static constexpr Eigen::Index output_dim = 2;

    Eigen::Index input_dim = 16;
    std::vector<Eigen::Index> hidden_dims{32, 32};
    Activation activation = Activation::tanh;
    double init_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;

    /// input_dim, hidden dims..., output_dim
    std::vector<Eigen::Index> layer_dims() const;

    friend bool operator==(const RegressorConfig&, const RegressorConfig&) = default;
};

/// Weights and biases of a fully connected network with a linear two-unit
/// output layer. weights[l] maps layer l activations (columns = samples) to
/// layer l + 1 pre-activations.
template <typename Scalar>
struct MlpParams {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    RegressorConfig config;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    std::size_t layers() const { return weights.size(); }

    Eigen::Index size() const {
        Eigen::Index n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
        return n;
    }

    bool all_finite() const {
        for (std::size_t l = 0; l < weights.size(); ++l)
            if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
        return true;
    }

    static MlpParams zeros(const RegressorConfig& config) {
        config.validate();
        MlpParams p;
        p.config = config;
        const auto dims = config.layer_dims();
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            p.weights.push_back(Matrix::Zero(dims[l + 1], dims[l]));
            p.biases.push_back(Vector::Zero(dims[l + 1]));
        }
        return p;
    }

    template <typename To>
    MlpParams<To> cast() const {
        MlpParams<To> out;
        out.config = config;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            out.weights.push_back(weights[l].template cast<To>());
            out.biases.push_back(biases[l].template cast<To>());
        }
        return out;
    }

    friend bool operator==(const MlpParams& a, const MlpParams& b) {
        if (!(a.config == b.config) || a.weights.size() != b.weights.size()) return false;
        for (std::size_t l = 0; l < a.weights.size(); ++l) {
            if (a.weights[l].rows() != b.weights[l].rows() || a.weights[l].cols() != b.weights[l].cols() ||
                a.biases[l].size() != b.biases[l].size())
                return false;
            if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
        }
        return true;
    }
};

using RegressorParams = MlpParams<double>;
/// Gradients are always accumulated in double, whatever the storage type.
using Gradients = MlpParams<double>;

template <typename A, typename B>
bool same_shape(const MlpParams<A>& a, const MlpParams<B>& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l)
        if (a.weights[l].rows() != b.weights[l].rows() || a.weights[l].cols() != b.weights[l].cols() ||
            a.biases[l].size() != b.biases[l].size())
            return false;
    return true;
}

/// Weights uniform in [-1, 1] * init_scale / sqrt(fan_in), biases zero.
template <typename Scalar = double>
MlpParams<Scalar> init(const RegressorConfig& config) {
    auto p = MlpParams<Scalar>::zeros(config);
    Rng rng(derive_seed(config.seed, {0x1417}));
    for (auto& w : p.weights) {
        const double scale = config.init_scale / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i)
                w(i, j) = static_cast<Scalar>(scale * rng.uniform(-1.0, 1.0));
    }
    return p;
}

namespace detail {

template <typename Derived>
void activate(Eigen::MatrixBase<Derived>& z, Activation act) {
    if (act == Activation::tanh)
        z.derived() = z.array().tanh().matrix();
    else
        z.derived() = z.array().max(typename Derived::Scalar(0)).matrix();
}

template <typename Scalar>
void require_input_dim(const MlpParams<Scalar>& params, Eigen::Index rows) {
    if (params.weights.empty()) throw InvalidArgument("regressor: uninitialized parameters");
    if (rows != params.weights.front().cols())
        throw InvalidArgument("regressor: feature dimension " + std::to_string(rows) + ", model expects " +
                              std::to_string(params.weights.front().cols()));
}

} // namespace detail

/// Raw outputs for a batch of column feature vectors (2 x N, not normalized).
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 2, Eigen::Dynamic> forward_batch(const MlpParams<Scalar>& params,
                                                       const Eigen::MatrixBase<Derived>& inputs) {
    detail::require_input_dim(params, inputs.rows());
    using Matrix = typename MlpParams<Scalar>::Matrix;
    Matrix a = inputs.template cast<Scalar>();
    const std::size_t last = params.layers() - 1;
    for (std::size_t l = 0; l < params.layers(); ++l) {
        Matrix z = params.weights[l] * a;
        z.colwise() += params.biases[l];
        if (l != last) detail::activate(z, params.config.activation);
        a = std::move(z);
    }
    return a;
}

template <typename Scalar, typename Derived>
HeadingEncoding forward(const MlpParams<Scalar>& params, const Eigen::MatrixBase<Derived>& x) {
    if (x.cols() != 1) throw InvalidArgument("forward: expected a single column feature vector");
    const auto out = forward_batch(params, x);
    return {static_cast<double>(out(0, 0)), static_cast<double>(out(1, 0))};
}

/// Labeled samples as columns.
struct LabeledBatch {
    Eigen::MatrixXd features;  // d x B
    Eigen::Matrix2Xd labels;   // 2 x B
};

/// One contiguous unlabeled subsequence. `triplets` is only read by the
/// triplet variant.
struct UnlabeledBatch {
    Eigen::MatrixXd features;  // d x T
    std::vector<std::int64_t> frames;
    std::vector<Triplet> triplets;
};

struct LossBreakdown {
    double supervised = 0.0;
    double continuity = 0.0;
    double combined = 0.0;

    friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct LossAndGrad {
    LossBreakdown loss;
    Gradients grad;
};

/// Combined objective supervised_weight * L_l + lambda * L_u over one labeled
/// batch and one unlabeled subsequence, with exact gradients by backprop.
/// With lambda == 0 the unlabeled batch is not touched.
template <typename Scalar>
LossAndGrad loss_and_grad(const MlpParams<Scalar>& params, const LabeledBatch& labeled,
                          const UnlabeledBatch& unlabeled, const LossConfig& config) {
    config.validate();
    const bool use_labeled = config.supervised_weight > 0.0;
    const bool use_unlabeled = config.lambda > 0.0;
    if (use_labeled && labeled.features.cols() == 0) throw InvalidArgument("loss_and_grad: empty labeled batch");
    if (labeled.features.cols() != labeled.labels.cols())
        throw InvalidArgument("loss_and_grad: labeled features and labels differ in count");
    if (use_unlabeled && unlabeled.features.cols() == 0)
        throw InvalidArgument("loss_and_grad: lambda > 0 requires a nonempty unlabeled sequence");
    if (!use_labeled && !use_unlabeled) throw InvalidArgument("loss_and_grad: both loss weights are zero");

    const Eigen::Index nb = use_labeled ? labeled.features.cols() : 0;
    const Eigen::Index nu = use_unlabeled ? unlabeled.features.cols() : 0;
    const Eigen::Index d = use_labeled ? labeled.features.rows() : unlabeled.features.rows();
    if (use_labeled && use_unlabeled && unlabeled.features.rows() != d)
        throw InvalidArgument("loss_and_grad: labeled and unlabeled feature dimensions differ");

    const MlpParams<double>* net = nullptr;
    MlpParams<double> widened;
    if constexpr (std::is_same_v<Scalar, double>) {
        net = &params;
    } else {
        widened = params.template cast<double>();
        net = &widened;
    }
    detail::require_input_dim(*net, d);

    Eigen::MatrixXd x(d, nb + nu);
    if (nb) x.leftCols(nb) = labeled.features;
    if (nu) x.rightCols(nu) = unlabeled.features;

    // Forward pass keeping every layer's activation.
    const std::size_t layers = net->layers();
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(layers + 1);
    acts.push_back(std::move(x));
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = net->weights[l] * acts.back();
        z.colwise() += net->biases[l];
        if (l + 1 != layers) detail::activate(z, net->config.activation);
        acts.push_back(std::move(z));
    }
    const Eigen::MatrixXd& out = acts.back();

    LossAndGrad r;
    Eigen::MatrixXd delta(2, nb + nu);
    if (nb) {
        const auto sup = supervised_loss(out.leftCols(nb), labeled.labels);
        r.loss.supervised = sup.value;
        delta.leftCols(nb) = config.supervised_weight * sup.grad;
    }
    if (nu) {
        const Eigen::Matrix2Xd seq = out.rightCols(nu);
        const auto cont = config.variant == ContinuityVariant::pairwise
                              ? pairwise_continuity_loss(seq, unlabeled.frames, config)
                              : triplet_continuity_loss(seq, unlabeled.frames, unlabeled.triplets);
        r.loss.continuity = cont.value;
        delta.rightCols(nu) = config.lambda * cont.grad;
    }
    if (!std::isfinite(r.loss.supervised) || !std::isfinite(r.loss.continuity))
        throw DomainError("loss_and_grad: non-finite loss (supervised=" + std::to_string(r.loss.supervised) +
                          ", continuity=" + std::to_string(r.loss.continuity) + ")");
    r.loss.combined = combined_loss(config.supervised_weight * r.loss.supervised, r.loss.continuity, config.lambda);

    r.grad = Gradients::zeros(net->config);
    for (std::size_t l = layers; l-- > 0;) {
        r.grad.weights[l].noalias() = delta * acts[l].transpose();
        r.grad.biases[l] = delta.rowwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd back = net->weights[l].transpose() * delta;
        const Eigen::MatrixXd& a = acts[l];
        if (net->config.activation == Activation::tanh)
            back.array() *= 1.0 - a.array().square();
        else
            back.array() *= (a.array() > 0.0).cast<double>();
        delta = std::move(back);
    }
    return r;
}

struct AdamSettings {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const AdamSettings&, const AdamSettings&) = default;
};

struct OptimizerState {
    AdamSettings settings;
    Gradients first_moment;
    Gradients second_moment;
    std::uint64_t step = 0;

    template <typename Scalar>
    static OptimizerState for_params(const MlpParams<Scalar>& params, AdamSettings settings = {}) {
        return {settings, Gradients::zeros(params.config), Gradients::zeros(params.config), 0};
    }
};

/// One bias-corrected Adam update. Returns the new snapshot and state.
template <typename Scalar>
std::pair<MlpParams<Scalar>, OptimizerState> adam_step(MlpParams<Scalar> params, const Gradients& grads,
                                                       OptimizerState state) {
    if (!same_shape(params, grads) || !same_shape(params, state.first_moment) ||
        !same_shape(params, state.second_moment))
        throw InvalidArgument("adam_step: shape mismatch between parameters, gradients and optimizer state");
    if (!grads.all_finite()) throw DomainError("adam_step: non-finite gradient");

    const auto& s = state.settings;
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(s.beta1, t);
    const double c2 = 1.0 - std::pow(s.beta2, t);

    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = s.beta1 * m + (1.0 - s.beta1) * g;
        v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseAbs2();
        const auto delta =
            (s.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon)).matrix().eval();
        p -= delta.template cast<Scalar>();
    };
    for (std::size_t l = 0; l < params.layers(); ++l) {
        update(params.weights[l], grads.weights[l], state.first_moment.weights[l], state.second_moment.weights[l]);
        update(params.biases[l], grads.biases[l], state.first_moment.biases[l], state.second_moment.biases[l]);
    }
    return {std::move(params), std::move(state)};
}

/// All parameters in declared order: per layer, the weight matrix
/// column-major followed by the bias vector.
template <typename Scalar>
Eigen::VectorXd flatten(const MlpParams<Scalar>& params) {
    Eigen::VectorXd v(params.size());
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < params.layers(); ++l) {
        const auto& w = params.weights[l];
        const auto& b = params.biases[l];
        v.segment(k, w.size()) = Eigen::Map<const typename MlpParams<Scalar>::Vector>(w.data(), w.size()).template cast<double>();
        k += w.size();
        v.segment(k, b.size()) = b.template cast<double>();
        k += b.size();
    }
    return v;
}

template <typename Scalar>
void unflatten(MlpParams<Scalar>& params, const Eigen::Ref<const Eigen::VectorXd>& values) {
    if (values.size() != params.size()) throw InvalidArgument("unflatten: size mismatch");
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < params.layers(); ++l) {
        auto& w = params.weights[l];
        auto& b = params.biases[l];
        Eigen::Map<typename MlpParams<Scalar>::Vector>(w.data(), w.size()) =
            values.segment(k, w.size()).template cast<Scalar>();
        k += w.size();
        b = values.segment(k, b.size()).template cast<Scalar>();
        k += b.size();
    }
}

inline constexpr int kCheckpointVersion = 1;

/// Text checkpoint: config echo followed by every layer array in declared
/// order, 17 significant digits so that a save/load round trip is exact.
void write_checkpoint(std::ostream& out, const RegressorParams& params);
RegressorParams read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const RegressorParams& params);
RegressorParams load_checkpoint(const std::filesystem::path& path);

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

} // namespace tempocont
