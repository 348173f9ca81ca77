#include "doctest.h"

#include "tempocont/error.hpp"
#include "tempocont/experiments.hpp"
#include "tempocont/trainer.hpp"

#include <cmath>
#include <set>

using namespace tempocont;

namespace {

struct Fixture {
    DomainSpec domain;
    Dataset data;
    LabeledBatch labeled;
    LabeledBatch val;
    TrainConfig config;

    explicit Fixture(double fraction = 0.5) {
        DomainOptions o;
        o.feature_dim = 6;
        o.noise_std = 0.2;
        domain = make_domain(o, 3);
        DatasetConfig dc;
        dc.train_sequences = 4;
        dc.val_sequences = 2;
        dc.sequence_length = 60;
        dc.label_fraction = fraction;
        dc.seed = 8;
        data = build_dataset(dc, domain);
        labeled = gather_labeled(data.train);
        val = gather_all(data.val);
        config.model.input_dim = 6;
        config.model.hidden_dims = {8};
        config.iterations = 30;
        config.eval_every = 10;
        config.labeled_batch_size = 16;
        config.unlabeled_sequence_length = 12;
        config.optimizer.learning_rate = 1e-2;
        config.seeds = SeedStreams::from(4);
    }
};

ExperimentConfig tiny_experiment() {
    auto c = ExperimentConfig::defaults();
    c.domain.feature_dim = 4;
    for (auto* d : {&c.source, &c.target}) {
        d->train_sequences = 3;
        d->val_sequences = 2;
        d->sequence_length = 40;
    }
    c.target.label_fraction = 0.1;
    for (auto* t : {&c.train, &c.tune}) {
        t->model.input_dim = 4;
        t->model.hidden_dims = {6};
        t->iterations = 12;
        t->eval_every = 4;
        t->labeled_batch_size = 8;
        t->unlabeled_sequence_length = 10;
    }
    return c;
}

bool same_history(const TrainHistory& a, const TrainHistory& b) {
    if (a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& x = a.records[i];
        const auto& y = b.records[i];
        if (x.iteration != y.iteration || x.supervised_loss != y.supervised_loss ||
            x.continuity_loss != y.continuity_loss || x.combined_loss != y.combined_loss ||
            x.validation.mse != y.validation.mse || x.validation.mean_angle_diff != y.validation.mean_angle_diff ||
            x.validation.accuracy != y.validation.accuracy)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("train_step with lambda = 0 leaves the unlabeled stream untouched") {
    Fixture f;
    f.config.loss.lambda = 0.0;
    auto params = init(f.config.model);
    auto state = OptimizerState::for_params(params);
    TrainStreams streams(f.config.seeds, static_cast<std::size_t>(f.labeled.features.cols()));
    const auto rec = train_step(params, state, f.labeled, f.data.train, f.config, streams);
    CHECK(rec.loss.continuity == 0.0);
    CHECK(rec.iteration == 1);
    CHECK(streams.unlabeled_rng() == Rng(f.config.seeds.unlabeled));
}

TEST_CASE("train_step decreases the loss on a single sample from zero init") {
    Fixture f;
    f.config.loss.lambda = 0.0;
    f.config.model.init_scale = 0.0;
    LabeledBatch one{f.labeled.features.leftCols(1), f.labeled.labels.leftCols(1)};
    auto params = init(f.config.model);
    auto state = OptimizerState::for_params(params);
    TrainStreams streams(f.config.seeds, 1);
    const double before = evaluate_model(params, one).mse;
    train_step(params, state, one, {}, f.config, streams);
    CHECK(evaluate_model(params, one).mse < before);
}

TEST_CASE("train_step is deterministic and isolates the labeled stream") {
    Fixture f;
    auto run = [&](double lambda) {
        auto cfg = f.config;
        cfg.loss.lambda = lambda;
        auto params = init(cfg.model);
        auto state = OptimizerState::for_params(params);
        TrainStreams streams(cfg.seeds, static_cast<std::size_t>(f.labeled.features.cols()));
        std::vector<StepRecord> recs;
        for (int i = 0; i < 5; ++i) recs.push_back(train_step(params, state, f.labeled, f.data.train, cfg, streams));
        return std::make_tuple(recs, params, streams.labeled_rng());
    };
    const auto a = run(0.1);
    const auto b = run(0.1);
    CHECK(std::get<0>(a) == std::get<0>(b));
    CHECK(std::get<1>(a) == std::get<1>(b));
    // the same labeled draws happen whether or not the continuity term is active
    CHECK(std::get<2>(a) == std::get<2>(run(0.0)));
}

TEST_CASE("train_step errors") {
    Fixture f;
    auto params = init(f.config.model);
    auto state = OptimizerState::for_params(params);
    TrainStreams streams(f.config.seeds, static_cast<std::size_t>(f.labeled.features.cols()));
    CHECK_THROWS_AS(train_step(params, state, f.labeled, {}, f.config, streams), InvalidArgument);
    TrainStreams empty(f.config.seeds, 0);
    CHECK_THROWS_AS(empty.next_labeled_batch(4), InvalidArgument);

    auto poisoned = f.labeled;
    poisoned.features(0, 0) = std::nan("");
    TrainStreams s2(f.config.seeds, static_cast<std::size_t>(poisoned.features.cols()));
    f.config.loss.lambda = 0.0;
    f.config.labeled_batch_size = static_cast<std::size_t>(poisoned.features.cols());
    CHECK_THROWS_AS(train_step(params, state, poisoned, {}, f.config, s2), DomainError);
}

TEST_CASE("train_run with zero iterations returns the initial parameters") {
    Fixture f;
    f.config.iterations = 0;
    const auto r = train_run(f.labeled, f.data.train, f.val, f.config);
    auto model = f.config.model;
    model.seed = f.config.seeds.init;
    CHECK(r.params == init(model));
    REQUIRE(r.history.records.size() == 1);
    CHECK(r.history.records[0].iteration == 0);
}

TEST_CASE("train_run records and determinism") {
    Fixture f;
    const auto a = train_run(f.labeled, f.data.train, f.val, f.config);
    const auto b = train_run(f.labeled, f.data.train, f.val, f.config);
    CHECK(a.params == b.params);
    CHECK(same_history(a.history, b.history));
    CHECK(a.history.records.size() == f.config.iterations / f.config.eval_every + 1);
    for (const auto& r : a.history.records) {
        CHECK(std::isfinite(r.supervised_loss));
        CHECK(std::isfinite(r.continuity_loss));
        CHECK(std::isfinite(r.combined_loss));
        CHECK(std::isfinite(r.validation.mse));
    }
    CHECK(a.history.records.back().iteration == f.config.iterations);
}

TEST_CASE("lambda = 0 run is independent of the unlabeled stream and data") {
    Fixture f;
    f.config.loss.lambda = 0.0;
    const auto sl = train_run(f.labeled, {}, f.val, f.config);
    const auto with_seq = train_run(f.labeled, f.data.train, f.val, f.config);
    auto other = f.config;
    other.seeds.unlabeled ^= 0xabcdef;
    const auto other_stream = train_run(f.labeled, f.data.train, f.val, other);
    CHECK(sl.params == with_seq.params);
    CHECK(sl.params == other_stream.params);
    CHECK(same_history(sl.history, other_stream.history));
}

TEST_CASE("finetune") {
    Fixture f;
    const auto base = train_run(f.labeled, f.data.train, f.val, f.config);
    auto cfg = f.config;
    cfg.iterations = 0;
    const auto same = finetune(base.params, f.labeled, f.data.train, f.val, cfg);
    CHECK(same.params == base.params);
    const auto moved = finetune(base.params, f.labeled, f.data.train, f.val, f.config);
    CHECK(!(moved.params == base.params));

    auto wide = f.config;
    wide.model.input_dim = 7;
    const auto other = init(wide.model);
    CHECK_THROWS_AS(finetune(other, f.labeled, f.data.train, f.val, f.config), InvalidArgument);
}

TEST_CASE("sequence_output_std") {
    Fixture f;
    auto zero_cfg = f.config.model;
    zero_cfg.init_scale = 0.0;
    auto constant = init(zero_cfg);
    constant.biases.back() << 0.3, 0.4;
    CHECK(sequence_output_std(constant, f.data.val) < 1e-12);
    const auto trained = train_run(f.labeled, f.data.train, f.val, f.config).params;
    CHECK(sequence_output_std(trained, f.data.val) > 0.0);
}

TEST_CASE("circle evaluation") {
    const auto domain = make_domain(DomainOptions{}, 2);
    const auto oracle = circle_eval(oracle_predictor(), domain, 5.0, 200, 1);
    CHECK(oracle.metrics.accuracy == 1.0);
    CHECK(oracle.metrics.mean_angle_diff < 1e-12);
    REQUIRE(oracle.rows.size() == 200);
    double turned = 0.0;
    for (std::size_t i = 1; i < oracle.rows.size(); ++i)
        turned += wrap_angle(oracle.rows[i].theta_true - oracle.rows[i - 1].theta_true);
    CHECK(turned == doctest::Approx(4 * kPi * 199.0 / 200.0).epsilon(1e-9));
    CHECK(std::hypot(oracle.rows[7].x, oracle.rows[7].y) == doctest::Approx(5.0));

    RegressorConfig zero_cfg;
    zero_cfg.init_scale = 0.0;
    const auto zero = circle_eval(model_predictor(init(zero_cfg)), domain, 5.0, 100, 1);
    CHECK(zero.metrics.degenerate());
    CHECK(zero.metrics.n_degenerate == 100);
    CHECK(std::isnan(zero.rows[0].theta_pred));
    CHECK(zero.metrics.accuracy == 0.0);
}

TEST_CASE("reference configuration reaches 0.9 validation accuracy") {
    auto c = ExperimentConfig::defaults();
    const auto data = build_experiment_data(c);
    auto cfg = c.train;
    cfg.loss.lambda = 0.0;
    cfg.seeds = SeedStreams::from(1);
    const auto r = train_run(gather_labeled(data.source.train), data.source.train, gather_all(data.source.val), cfg);
    CHECK(r.history.records.size() == 21);
    CHECK(r.history.records.back().validation.accuracy >= 0.9);
}

TEST_CASE("presets produce the expected tables") {
    auto c = tiny_experiment();
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto frac = label_fraction_sweep({0.1, 0.5, 1.0}, seeds, c);
    REQUIRE(frac.size() == 12);
    CHECK(frac[0].method == "SL");
    CHECK(frac[2].method == "SSL");
    CHECK(frac[4].fraction == 0.5);
    CHECK_THROWS_AS(label_fraction_sweep({0.0}, seeds, c), InvalidArgument);

    const auto four = four_setting_experiment(c, seeds);
    REQUIRE(four.size() == 8);
    std::set<int> settings;
    for (const auto& r : four) {
        settings.insert(r.setting);
        CHECK(r.history.records.size() == c.tune.iterations / c.tune.eval_every + 1);
    }
    CHECK(settings == std::set<int>{1, 2, 3, 4});
    // every setting starts from the same pretrained model
    CHECK(four[0].history.records[0].validation.mse == four[1].history.records[0].validation.mse);

    const auto lam = lambda_sweep({0.0, 0.1, 10.0}, c, seeds);
    REQUIRE(lam.size() == 6);
    CHECK(lam[0].lambda == 0.0);
    CHECK_THROWS_AS(lambda_sweep({-1.0}, c, seeds), InvalidArgument);

    const auto ft = finetune_comparison(c, seeds);
    REQUIRE(ft.size() == 6);
    CHECK(ft[0].method == "no-finetune");
}

TEST_CASE("job count does not change results") {
    auto c = tiny_experiment();
    const std::vector<std::uint64_t> seeds{3, 4, 5};
    const auto serial = lambda_sweep({0.0, 0.1}, c, seeds);
    c.jobs = 3;
    const auto parallel = lambda_sweep({0.0, 0.1}, c, seeds);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].lambda == parallel[i].lambda);
        CHECK(serial[i].seed == parallel[i].seed);
        CHECK(serial[i].final_val_mse == parallel[i].final_val_mse);
        CHECK(serial[i].seq_output_std == parallel[i].seq_output_std);
    }
}

TEST_CASE("run_indexed keeps order and rethrows") {
    const auto v = run_indexed(50, 4, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<int>(i * i));
    CHECK_THROWS_AS(run_indexed(10, 3,
                                [](std::size_t i) {
                                    if (i == 6) throw DomainError("boom");
                                    return 0;
                                }),
                    DomainError);
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}
