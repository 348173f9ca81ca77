#include "tempocont/trainer.hpp"

#include "tempocont/error.hpp"
#include "tempocont/text.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace tempocont {

void TrainConfig::validate() const {
    model.validate();
    loss.validate();
    if (labeled_batch_size < 1) throw InvalidArgument("train: labeled_batch_size must be >= 1");
    if (unlabeled_sequence_length < 3) throw InvalidArgument("train: unlabeled_sequence_length must be >= 3");
    if (eval_every < 1) throw InvalidArgument("train: eval_every must be >= 1");
    if (!(optimizer.learning_rate > 0.0)) throw InvalidArgument("train: learning rate must be positive");
}

TrainStreams::TrainStreams(const SeedStreams& seeds, std::size_t labeled_count)
    : labeled_(seeds.labeled), unlabeled_(seeds.unlabeled), order_(labeled_count), cursor_(labeled_count) {
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
}

std::vector<Eigen::Index> TrainStreams::next_labeled_batch(std::size_t size) {
    if (order_.empty()) throw InvalidArgument("train: empty labeled set");
    size = std::min(size, order_.size());
    std::vector<Eigen::Index> batch;
    batch.reserve(size);
    while (batch.size() < size) {
        if (cursor_ == order_.size()) {
            labeled_.shuffle(order_.begin(), order_.end());
            cursor_ = 0;
        }
        batch.push_back(order_[cursor_++]);
    }
    return batch;
}

UnlabeledBatch draw_unlabeled(std::span<const SampleSequence> sequences, const TrainConfig& config, Rng& rng) {
    if (sequences.empty()) throw InvalidArgument("train: lambda > 0 requires unlabeled sequences");
    const auto& seq = sequences[rng.index(sequences.size())];
    const std::size_t len = std::min(config.unlabeled_sequence_length, seq.size());
    const std::size_t start = rng.index(seq.size() - len + 1);

    UnlabeledBatch b;
    b.features = seq.features.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len));
    b.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(start),
                    seq.frames.begin() + static_cast<std::ptrdiff_t>(start + len));
    if (config.loss.variant == ContinuityVariant::triplet)
        b.triplets = sample_triplets(b.frames, config.loss.triplet_samples_per_sequence, rng, config.loss.near_window);
    return b;
}

StepRecord train_step(RegressorParams& params, OptimizerState& state, const LabeledBatch& labeled,
                      std::span<const SampleSequence> unlabeled, const TrainConfig& config, TrainStreams& streams) {
    LabeledBatch batch;
    if (config.loss.supervised_weight > 0.0) {
        const auto idx = streams.next_labeled_batch(config.labeled_batch_size);
        batch.features = labeled.features(Eigen::all, idx);
        batch.labels = labeled.labels(Eigen::all, idx);
    }
    UnlabeledBatch seq;
    if (config.loss.lambda > 0.0) seq = draw_unlabeled(unlabeled, config, streams.unlabeled_rng());

    auto lg = loss_and_grad(params, batch, seq, config.loss);
    if (!std::isfinite(lg.loss.combined))
        throw DomainError("train: non-finite loss at step " + std::to_string(state.step + 1) +
                          " (supervised=" + text::format_double(lg.loss.supervised) +
                          ", continuity=" + text::format_double(lg.loss.continuity) + ")");
    auto [next, next_state] = adam_step(std::move(params), lg.grad, std::move(state));
    params = std::move(next);
    state = std::move(next_state);
    return {state.step, lg.loss};
}

MetricsReport evaluate_model(const RegressorParams& params, const LabeledBatch& data) {
    return evaluate_lenient(forward_batch(params, data.features), data.labels);
}

namespace {

void check_inputs(const RegressorParams& params, const LabeledBatch& labeled,
                  std::span<const SampleSequence> unlabeled, const LabeledBatch& validation,
                  const TrainConfig& config) {
    config.validate();
    const Eigen::Index d = params.config.input_dim;
    if (config.loss.supervised_weight > 0.0 && labeled.features.cols() == 0)
        throw InvalidArgument("train: labeled set is empty");
    if (labeled.features.cols() > 0 && labeled.features.rows() != d)
        throw InvalidArgument("train: labeled feature dimension does not match the model");
    if (config.loss.lambda > 0.0 && unlabeled.empty())
        throw InvalidArgument("train: lambda > 0 requires unlabeled sequences");
    for (const auto& s : unlabeled)
        if (s.features.rows() != d) throw InvalidArgument("train: unlabeled feature dimension does not match the model");
    if (validation.features.cols() == 0) throw InvalidArgument("train: validation set is empty");
    if (validation.features.rows() != d)
        throw InvalidArgument("train: validation feature dimension does not match the model");
}

TrainResult run_loop(RegressorParams params, const LabeledBatch& labeled, std::span<const SampleSequence> unlabeled,
                     const LabeledBatch& validation, const TrainConfig& config) {
    check_inputs(params, labeled, unlabeled, validation, config);

    auto state = OptimizerState::for_params(params, config.optimizer);
    TrainStreams streams(config.seeds, static_cast<std::size_t>(labeled.features.cols()));
    TrainResult result;

    double continuity_sum = 0.0;
    std::size_t continuity_steps = 0;
    auto record = [&](std::uint64_t iteration) {
        HistoryRecord r;
        r.iteration = iteration;
        if (labeled.features.cols() > 0)
            r.supervised_loss = supervised_loss(forward_batch(params, labeled.features), labeled.labels).value;
        r.continuity_loss = continuity_steps ? continuity_sum / static_cast<double>(continuity_steps) : 0.0;
        r.combined_loss =
            combined_loss(config.loss.supervised_weight * r.supervised_loss, r.continuity_loss, config.loss.lambda);
        r.validation = evaluate_model(params, validation);
        if (!std::isfinite(r.combined_loss) || !std::isfinite(r.validation.mse))
            throw DomainError("train: non-finite loss at iteration " + std::to_string(iteration));
        result.history.records.push_back(r);
        continuity_sum = 0.0;
        continuity_steps = 0;
    };

    record(0);
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        const auto step = train_step(params, state, labeled, unlabeled, config, streams);
        continuity_sum += step.loss.continuity;
        ++continuity_steps;
        if (it % config.eval_every == 0) record(it);
    }
    result.params = std::move(params);
    return result;
}

} // namespace

TrainResult train_run(const LabeledBatch& labeled, std::span<const SampleSequence> unlabeled,
                      const LabeledBatch& validation, const TrainConfig& config) {
    auto model = config.model;
    model.seed = config.seeds.init;
    return run_loop(init(model), labeled, unlabeled, validation, config);
}

TrainResult finetune(const RegressorParams& pretrained, const LabeledBatch& labeled,
                     std::span<const SampleSequence> unlabeled, const LabeledBatch& validation,
                     const TrainConfig& config) {
    if (!pretrained.all_finite()) throw InvalidArgument("finetune: pretrained parameters are not finite");
    return run_loop(pretrained, labeled, unlabeled, validation, config);
}

double sequence_output_std(const RegressorParams& params, std::span<const SampleSequence> sequences) {
    if (sequences.empty()) throw InvalidArgument("sequence_output_std: no sequences");
    double total = 0.0;
    std::size_t counted = 0;
    for (const auto& seq : sequences) {
        const Eigen::Matrix2Xd out = forward_batch(params, seq.features);
        std::vector<double> theta;
        for (Eigen::Index t = 0; t < out.cols(); ++t) {
            if (std::hypot(out(0, t), out(1, t)) < 1e-12) continue;
            const double a = decode({out(0, t), out(1, t)});
            theta.push_back(theta.empty() ? a : theta.back() + wrap_angle(a - theta.back()));
        }
        if (theta.size() < 2) continue;
        const double mean = std::accumulate(theta.begin(), theta.end(), 0.0) / static_cast<double>(theta.size());
        double var = 0.0;
        for (double a : theta) var += (a - mean) * (a - mean);
        total += std::sqrt(var / static_cast<double>(theta.size()));
        ++counted;
    }
    return counted ? total / static_cast<double>(counted) : 0.0;
}

Predictor model_predictor(const RegressorParams& params) {
    return [params](const Eigen::VectorXd& features, double) { return forward(params, features); };
}

Predictor oracle_predictor() {
    return [](const Eigen::VectorXd&, double true_heading) { return encode(true_heading); };
}

CircleReport circle_eval(const Predictor& predictor, const DomainSpec& domain, double radius, std::size_t frames,
                         std::uint64_t seed) {
    const auto traj = gen_trajectory(TrajectoryKind::circle, frames, circle_params(radius, 2.0, frames), seed);
    Rng render(derive_seed(seed, {0xc1c1e}));
    CircleReport report;
    Eigen::Matrix2Xd pred(2, static_cast<Eigen::Index>(frames));
    Eigen::Matrix2Xd truth(2, static_cast<Eigen::Index>(frames));
    for (std::size_t t = 0; t < traj.size(); ++t) {
        const auto& p = traj[t];
        const auto enc = predictor(render_features(p.heading, domain, render), p.heading);
        const auto c = static_cast<Eigen::Index>(t);
        pred.col(c) = enc.vec();
        truth.col(c) = encode(p.heading).vec();
        const double theta_pred =
            std::hypot(enc.c, enc.s) < 1e-12 ? std::numeric_limits<double>::quiet_NaN() : decode(enc);
        report.rows.push_back({p.frame, p.position.x(), p.position.y(), p.heading, theta_pred});
    }
    report.metrics = evaluate_lenient(pred, truth);
    return report;
}

} // namespace tempocont
