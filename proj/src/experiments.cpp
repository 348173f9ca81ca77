#include "tempocont/experiments.hpp"

#include "tempocont/error.hpp"

#include <algorithm>
#include <bit>

namespace tempocont {

namespace {

enum : std::uint64_t { kLabelTag = 0x1abe1, kPretrainTag = 0x9e7, kTuneTag = 0x7e4e };

Dataset with_fraction(const Dataset& ds, double fraction, std::uint64_t seed) {
    Dataset out = ds;
    relabel(out, fraction, derive_seed(seed, {kLabelTag}));
    return out;
}

TrainConfig seeded(TrainConfig cfg, std::uint64_t seed, double lambda) {
    cfg.seeds = SeedStreams::from(seed);
    cfg.loss.lambda = lambda;
    return cfg;
}

double final_mse(const TrainResult& r, const LabeledBatch& val) { return evaluate_model(r.params, val).mse; }

} // namespace

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    c.domain = {16, 3, 0.8};

    c.source.train_sequences = 50;
    c.source.val_sequences = 10;
    c.source.sequence_length = 500;
    c.source.label_fraction = 1.0;
    c.source.seed = 101;
    c.source.trajectory.heading_spread = 0.3;  // start headings cluster around 0

    c.target = c.source;
    c.target.label_fraction = 0.012;  // 6 of 500 frames
    c.target.seed = 202;

    c.train.iterations = 2000;
    c.train.eval_every = 100;
    c.tune = c.train;
    c.tune.iterations = 500;
    c.tune.eval_every = 50;
    return c;
}

ExperimentData build_experiment_data(const ExperimentConfig& config) {
    ExperimentData d;
    d.source_domain = make_domain(config.domain, config.domain_seed);
    d.target_domain = apply_domain_shift(d.source_domain, config.shift_seed, config.shift);
    d.source = build_dataset(config.source, d.source_domain);
    d.target = build_dataset(config.target, d.target_domain);
    return d;
}

std::vector<FractionRow> label_fraction_sweep(const std::vector<double>& fractions,
                                              const std::vector<std::uint64_t>& seeds,
                                              const ExperimentConfig& config) {
    return label_fraction_sweep(fractions, seeds, config, build_experiment_data(config));
}

std::vector<FractionRow> label_fraction_sweep(const std::vector<double>& fractions,
                                              const std::vector<std::uint64_t>& seeds,
                                              const ExperimentConfig& config,
                                              const ExperimentData& data) {
    for (double f : fractions)
        if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("label_fraction_sweep: fractions must lie in (0, 1]");
    const LabeledBatch val = gather_all(data.source.val);

    struct Job {
        double fraction;
        bool ssl;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (double f : fractions)
        for (bool ssl : {false, true})
            for (auto s : seeds) jobs.push_back({f, ssl, s});

    return run_indexed(jobs.size(), config.jobs, [&](std::size_t i) {
        const auto& job = jobs[i];
        const Dataset ds = with_fraction(data.source, job.fraction, job.seed);
        const auto cfg = seeded(config.train, job.seed, job.ssl ? config.ssl_lambda : 0.0);
        const auto result = train_run(gather_labeled(ds.train), ds.train, val, cfg);
        return FractionRow{job.fraction, job.ssl ? "SSL" : "SL", job.seed, final_mse(result, val)};
    });
}

RegressorParams pretrain(const ExperimentData& data, const ExperimentConfig& config, std::uint64_t seed) {
    const std::uint64_t s = derive_seed(seed, {kPretrainTag});
    const Dataset ds = config.pretrain_fraction < 1.0 ? with_fraction(data.source, config.pretrain_fraction, s)
                                                      : data.source;
    const auto cfg = seeded(config.train, s, config.ssl_lambda);
    return train_run(gather_labeled(ds.train), ds.train, gather_all(ds.val), cfg).params;
}

std::vector<SettingRow> four_setting_experiment(const ExperimentConfig& config,
                                                const std::vector<std::uint64_t>& seeds) {
    return four_setting_experiment(config, seeds, build_experiment_data(config));
}

std::vector<SettingRow> four_setting_experiment(const ExperimentConfig& config,
                                                const std::vector<std::uint64_t>& seeds,
                                                const ExperimentData& data) {
    const auto pretrained =
        run_indexed(seeds.size(), config.jobs, [&](std::size_t i) { return pretrain(data, config, seeds[i]); });

    const LabeledBatch target_labeled = gather_labeled(data.target.train);
    const LabeledBatch val = gather_all(data.target.val);
    // Same number of labels as the target set, drawn from the source domain.
    const Dataset source_few = with_fraction(data.source, config.target.label_fraction, config.source.seed);
    const LabeledBatch source_labeled = gather_labeled(source_few.train);
    const LabeledBatch none{Eigen::MatrixXd(data.target.feature_dim, 0), Eigen::Matrix2Xd(2, 0)};

    return run_indexed(seeds.size() * 4, config.jobs, [&](std::size_t i) {
        const std::size_t si = i / 4;
        const int setting = static_cast<int>(i % 4) + 1;
        auto cfg = seeded(config.tune, derive_seed(seeds[si], {kTuneTag}), config.ssl_lambda);
        const LabeledBatch* labeled = &target_labeled;
        std::span<const SampleSequence> unlabeled = data.target.train;
        switch (setting) {
        case 1:
            cfg.loss.lambda = 0.0;
            unlabeled = {};
            break;
        case 2:
            cfg.loss.supervised_weight = 0.0;
            labeled = &none;
            break;
        case 4:
            labeled = &source_labeled;
            break;
        default:
            break;
        }
        auto result = finetune(pretrained[si], *labeled, unlabeled, val, cfg);
        return SettingRow{setting, seeds[si], std::move(result.history)};
    });
}

std::vector<LambdaRow> lambda_sweep(const std::vector<double>& lambdas, const ExperimentConfig& config,
                                    const std::vector<std::uint64_t>& seeds) {
    return lambda_sweep(lambdas, config, seeds, build_experiment_data(config));
}

std::vector<LambdaRow> lambda_sweep(const std::vector<double>& lambdas, const ExperimentConfig& config,
                                    const std::vector<std::uint64_t>& seeds,
                                    const ExperimentData& data) {
    for (double l : lambdas)
        if (!(l >= 0.0)) throw InvalidArgument("lambda_sweep: lambda must be >= 0");
    const LabeledBatch val = gather_all(data.source.val);

    return run_indexed(lambdas.size() * seeds.size(), config.jobs, [&](std::size_t i) {
        const double lambda = lambdas[i / seeds.size()];
        const auto seed = seeds[i % seeds.size()];
        const Dataset ds = with_fraction(data.source, config.lambda_sweep_fraction, seed);
        const auto result = train_run(gather_labeled(ds.train), ds.train, val, seeded(config.train, seed, lambda));
        return LambdaRow{lambda, seed, final_mse(result, val), sequence_output_std(result.params, data.source.val)};
    });
}

std::vector<FinetuneRow> finetune_comparison(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds) {
    return finetune_comparison(config, seeds, build_experiment_data(config));
}

std::vector<FinetuneRow> finetune_comparison(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                                             const ExperimentData& data) {
    const LabeledBatch labeled = gather_labeled(data.target.train);
    const LabeledBatch val = gather_all(data.target.val);
    const auto pretrained =
        run_indexed(seeds.size(), config.jobs, [&](std::size_t i) { return pretrain(data, config, seeds[i]); });

    return run_indexed(seeds.size() * 3, config.jobs, [&](std::size_t i) {
        const std::size_t si = i / 3;
        const int kind = static_cast<int>(i % 3);
        if (kind == 0) return FinetuneRow{"no-finetune", seeds[si], evaluate_model(pretrained[si], val)};
        const auto cfg =
            seeded(config.tune, derive_seed(seeds[si], {kTuneTag}), kind == 1 ? 0.0 : config.ssl_lambda);
        const auto result = finetune(pretrained[si], labeled, data.target.train, val, cfg);
        return FinetuneRow{kind == 1 ? "SL-finetune" : "SSL-finetune", seeds[si], evaluate_model(result.params, val)};
    });
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median: no values");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace tempocont
