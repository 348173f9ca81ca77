#pragma once

#include "tempocont/angular.hpp"
#include "tempocont/losses.hpp"
#include "tempocont/random.hpp"
#include "tempocont/regressor.hpp"
#include "tempocont/synth.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tempocont {

/// Three independent streams: parameter init, labeled batching and
/// unlabeled sequence/triplet sampling. Keeping them apart makes a
/// lambda = 0 run identical to a purely supervised one.
struct SeedStreams {
    std::uint64_t init = 1;
    std::uint64_t labeled = 2;
    std::uint64_t unlabeled = 3;

    static SeedStreams from(std::uint64_t seed) {
        return {derive_seed(seed, {1}), derive_seed(seed, {2}), derive_seed(seed, {3})};
    }
};

struct TrainConfig {
    RegressorConfig model;  // model.seed is replaced by seeds.init
    std::size_t iterations = 2000;
    std::size_t labeled_batch_size = 64;
    std::size_t unlabeled_sequence_length = 32;
    LossConfig loss;
    AdamSettings optimizer;
    std::size_t eval_every = 100;
    SeedStreams seeds;

    void validate() const;
};

/// Per-run random state. Labeled batches come from a reshuffled epoch order.
class TrainStreams {
public:
    TrainStreams(const SeedStreams& seeds, std::size_t labeled_count);

    std::vector<Eigen::Index> next_labeled_batch(std::size_t size);
    Rng& labeled_rng() { return labeled_; }
    Rng& unlabeled_rng() { return unlabeled_; }

private:
    Rng labeled_;
    Rng unlabeled_;
    std::vector<Eigen::Index> order_;
    std::size_t cursor_ = 0;
};

struct StepRecord {
    std::uint64_t iteration = 0;  // optimizer step count after the update
    LossBreakdown loss;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// Draws a contiguous window of `length` frames from a uniformly chosen
/// sequence (the whole sequence when shorter), plus triplets when the loss
/// needs them.
UnlabeledBatch draw_unlabeled(std::span<const SampleSequence> sequences, const TrainConfig& config, Rng& rng);

/// One iteration: a shuffled labeled batch and one unlabeled subsequence,
/// combined loss, backprop and an Adam update of `params`/`state`.
StepRecord train_step(RegressorParams& params, OptimizerState& state, const LabeledBatch& labeled,
                      std::span<const SampleSequence> unlabeled, const TrainConfig& config, TrainStreams& streams);

struct HistoryRecord {
    std::uint64_t iteration = 0;
    double supervised_loss = 0.0;   // over the full labeled set at this point
    double continuity_loss = 0.0;   // mean over the steps since the last record
    double combined_loss = 0.0;
    MetricsReport validation;
};

struct TrainHistory {
    std::vector<HistoryRecord> records;
};

struct TrainResult {
    RegressorParams params;
    TrainHistory history;
};

/// `iterations` train steps from freshly initialized parameters, with a
/// validation record at iteration 0 and every `eval_every` steps.
TrainResult train_run(const LabeledBatch& labeled, std::span<const SampleSequence> unlabeled,
                      const LabeledBatch& validation, const TrainConfig& config);

/// Same loop, starting from `pretrained` with a fresh optimizer state.
TrainResult finetune(const RegressorParams& pretrained, const LabeledBatch& labeled,
                     std::span<const SampleSequence> unlabeled, const LabeledBatch& validation,
                     const TrainConfig& config);

MetricsReport evaluate_model(const RegressorParams& params, const LabeledBatch& data);

/// Standard deviation of the (unwrapped) decoded headings inside each
/// sequence, averaged over sequences.
double sequence_output_std(const RegressorParams& params, std::span<const SampleSequence> sequences);

/// Heading predictor for circle evaluation. The true heading is passed for
/// oracle/debug predictors only.
using Predictor = std::function<HeadingEncoding(const Eigen::VectorXd& features, double true_heading)>;

Predictor model_predictor(const RegressorParams& params);
Predictor oracle_predictor();

struct CircleRow {
    std::int64_t frame = 0;
    double x = 0.0;
    double y = 0.0;
    double theta_true = 0.0;
    double theta_pred = 0.0;  // NaN when the prediction is degenerate
};

struct CircleReport {
    MetricsReport metrics;
    std::vector<CircleRow> rows;
};

/// Two counterclockwise revolutions of a circle of `radius` in `frames`
/// frames, rendered in `domain` and run through `predictor`.
CircleReport circle_eval(const Predictor& predictor, const DomainSpec& domain, double radius, std::size_t frames,
                         std::uint64_t seed = 0);

} // namespace tempocont
