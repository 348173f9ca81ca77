#pragma once

#include "tempocont/synth.hpp"
#include "tempocont/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tempocont {

/// Everything the sweeps need to build their synthetic data and runs.
/// Source = the open-data stand-in, target = the shifted filming stand-in.
struct ExperimentConfig {
    DomainOptions domain;
    std::uint64_t domain_seed = 11;
    std::uint64_t shift_seed = 17;
    ShiftOptions shift;
    DatasetConfig source;   // label_fraction is overridden by the sweeps
    DatasetConfig target;   // few labels per sequence
    TrainConfig train;      // pretraining and the source-domain sweeps
    TrainConfig tune;       // target-domain fine-tuning
    double ssl_lambda = 0.1;
    double lambda_sweep_fraction = 0.1;  // source labels exposed in the lambda sweep
    double pretrain_fraction = 1.0;
    unsigned jobs = 1;

    /// Defaults used by the CLI and the acceptance suite.
    static ExperimentConfig defaults();
};

struct ExperimentData {
    DomainSpec source_domain;
    DomainSpec target_domain;
    Dataset source;
    Dataset target;
};

ExperimentData build_experiment_data(const ExperimentConfig& config);

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads; results come
/// back in index order whatever the job count.
template <typename Fn>
auto run_indexed(std::size_t count, unsigned jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))>;

struct FractionRow {
    double fraction = 0.0;
    std::string method;  // "SL" or "SSL"
    std::uint64_t seed = 0;
    double final_val_mse = 0.0;
};

/// SL (lambda = 0) and SSL (lambda = ssl_lambda) per (fraction, seed) on the
/// source domain. Rows ordered by fraction, then method, then seed.
/// The overloads taking `data` use it instead of generating from `config`.
std::vector<FractionRow> label_fraction_sweep(const std::vector<double>& fractions,
                                              const std::vector<std::uint64_t>& seeds,
                                              const ExperimentConfig& config);
std::vector<FractionRow> label_fraction_sweep(const std::vector<double>& fractions,
                                              const std::vector<std::uint64_t>& seeds,
                                              const ExperimentConfig& config,
                                              const ExperimentData& data);

/// Source-domain model trained with the SSL objective; the starting point of
/// every target-domain experiment.
RegressorParams pretrain(const ExperimentData& data, const ExperimentConfig& config, std::uint64_t seed);

struct SettingRow {
    int setting = 0;
    std::uint64_t seed = 0;
    TrainHistory history;
};

/// From the pretrained model, on target-domain validation data:
///   1 labeled target only, 2 unlabeled target only, 3 labeled + unlabeled
///   target, 4 labeled source + unlabeled target.
std::vector<SettingRow> four_setting_experiment(const ExperimentConfig& config,
                                                const std::vector<std::uint64_t>& seeds);
std::vector<SettingRow> four_setting_experiment(const ExperimentConfig& config,
                                                const std::vector<std::uint64_t>& seeds,
                                                const ExperimentData& data);

struct LambdaRow {
    double lambda = 0.0;
    std::uint64_t seed = 0;
    double final_val_mse = 0.0;
    double seq_output_std = 0.0;
};

std::vector<LambdaRow> lambda_sweep(const std::vector<double>& lambdas, const ExperimentConfig& config,
                                    const std::vector<std::uint64_t>& seeds);
std::vector<LambdaRow> lambda_sweep(const std::vector<double>& lambdas, const ExperimentConfig& config,
                                    const std::vector<std::uint64_t>& seeds,
                                    const ExperimentData& data);

struct FinetuneRow {
    std::string method;  // "no-finetune", "SL-finetune", "SSL-finetune"
    std::uint64_t seed = 0;
    MetricsReport validation;
};

std::vector<FinetuneRow> finetune_comparison(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds);
std::vector<FinetuneRow> finetune_comparison(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                                             const ExperimentData& data);

double median(std::vector<double> values);

} // namespace tempocont

#include "tempocont/detail/run_indexed.hpp"
