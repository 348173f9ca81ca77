// tempocont: synthetic data generation, training, fine-tuning, evaluation,
// experiment sweeps and ground-plane ray casting.

#include "cli_support.hpp"

#include "tempocont/error.hpp"
#include "tempocont/experiments.hpp"
#include "tempocont/geometry.hpp"
#include "tempocont/text.hpp"
#include "tempocont/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <memory>
#include <optional>

using namespace tempocont;
using namespace tempocont::cli;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) { return text::format_double(v == 0.0 ? 0.0 : v); }  // no "-0"

std::vector<Eigen::Index> parse_hidden(const std::string& s) {
    std::vector<Eigen::Index> dims;
    if (text::trim(s).empty()) return dims;
    for (auto v : parse_uint_list(s, "hidden")) dims.push_back(static_cast<Eigen::Index>(v));
    return dims;
}

ContinuityVariant parse_variant(const std::string& s) {
    if (s == "triplet") return ContinuityVariant::triplet;
    if (s == "pairwise") return ContinuityVariant::pairwise;
    throw UsageError("--variant must be 'triplet' or 'pairwise', got '" + s + "'");
}

/// Synthetic domain flags shared by gen-data, eval and sweep.
struct DomainFlags {
    std::int64_t feature_dim = 16;
    int max_frequency = 3;
    double noise = 0.8;
    std::uint64_t domain_seed = 11;
    std::string shift_seed;
    double shift_offset = 0.25;
    double shift_min_scale = 0.5;
    double shift_max_scale = 2.0;
    double shift_noise_factor = 2.0;
    bool shift_rotate = false;

    DomainOptions options() const {
        if (feature_dim < 1) throw UsageError("--feature-dim must be >= 1");
        return {static_cast<Eigen::Index>(feature_dim), max_frequency, noise};
    }
    ShiftOptions shift() const {
        ShiftOptions o;
        o.offset_std = shift_offset;
        o.min_scale = shift_min_scale;
        o.max_scale = shift_max_scale;
        o.noise_factor = shift_noise_factor;
        o.rotate = shift_rotate;
        return o;
    }
    DomainSpec base() const { return make_domain(options(), domain_seed); }
    DomainSpec resolve() const {
        const auto d = base();
        return shift_seed.empty() ? d : apply_domain_shift(d, parse_seed(shift_seed, "shift-seed"), shift());
    }
};

// ---------------------------------------------------------------- gen-data

class GenData : public Command {
public:
    explicit GenData(CLI::App& app) : Command(app, "gen-data", "Write a synthetic sequential dataset") {
        option("out", out_, "dataset file to write")->required();
        option("shift-out", shift_out_, "shifted-domain dataset (default: <out>.shifted)");
        option("sequences", sequences_, "training sequences");
        option("val-sequences", val_sequences_, "validation sequences (always labeled)");
        option("length", length_, "frames per sequence");
        option("label-fraction", fraction_, "fraction of training frames with a label");
        option("kind", kind_, "random_walk or circle");
        option("label-source", label_source_, "ground_truth or motion_track");
        option("motion-window", motion_window_, "frames spanned by motion-track differences");
        option("heading-spread", spread_, "std of random-walk start headings; negative = uniform");
        option("max-heading-step", max_step_, "random-walk heading change bound per frame (rad)");
        option("speed", speed_, "meters per frame");
        option("radius", radius_, "circle radius (m)");
        option("feature-dim", domain_.feature_dim, "feature dimension");
        option("max-frequency", domain_.max_frequency, "largest Fourier frequency");
        option("noise", domain_.noise, "feature noise std");
        option("domain-seed", domain_.domain_seed, "appearance model seed");
        option("shift-seed", domain_.shift_seed, "also write a shifted-domain dataset built with this seed");
        option("shift-offset", domain_.shift_offset, "std of the shift offset");
        option("shift-min-scale", domain_.shift_min_scale, "smallest singular value of the shift map");
        option("shift-max-scale", domain_.shift_max_scale, "largest singular value of the shift map");
        option("shift-noise-factor", domain_.shift_noise_factor, "noise multiplier in the shifted domain");
        flag("shift-rotate", domain_.shift_rotate, "mix features with a second rotation");
        seed_option("dataset seed");
    }

    int run() override {
        const auto t0 = Clock::now();
        DatasetConfig c;
        c.train_sequences = sequences_;
        c.val_sequences = val_sequences_;
        c.sequence_length = length_;
        c.label_fraction = fraction_;
        if (kind_ == "random_walk") c.kind = TrajectoryKind::random_walk;
        else if (kind_ == "circle") c.kind = TrajectoryKind::circle;
        else throw UsageError("--kind must be 'random_walk' or 'circle'");
        if (label_source_ == "ground_truth") c.label_source = LabelSource::ground_truth;
        else if (label_source_ == "motion_track") c.label_source = LabelSource::motion_track;
        else throw UsageError("--label-source must be 'ground_truth' or 'motion_track'");
        c.motion_window = motion_window_;
        if (spread_ >= 0.0) c.trajectory.heading_spread = spread_;
        c.trajectory.max_heading_step = max_step_;
        c.trajectory.speed = speed_;
        c.trajectory.radius = radius_;
        c.seed = seed_;

        const auto base = domain_.base();
        save_dataset(out_, build_dataset(c, base));
        if (!domain_.shift_seed.empty()) {
            if (shift_out_.empty()) shift_out_ = out_ + ".shifted";
            const auto shifted = apply_domain_shift(base, parse_seed(domain_.shift_seed, "shift-seed"), domain_.shift());
            save_dataset(shift_out_, build_dataset(c, shifted));
        }
        write_manifest(out_, *this, seconds_since(t0), {});
        return 0;
    }

private:
    std::string out_, shift_out_;
    std::size_t sequences_ = 50, val_sequences_ = 10, length_ = 500, motion_window_ = 2;
    double fraction_ = 1.0, spread_ = 0.3, max_step_ = 0.1, speed_ = 1.0, radius_ = 5.0;
    std::string kind_ = "random_walk", label_source_ = "ground_truth";
    DomainFlags domain_;
};

// ---------------------------------------------------------- train/finetune

std::string history_csv(const TrainHistory& h) {
    Csv csv("iteration,supervised_loss,continuity_loss,combined_loss,val_mse,val_angle_diff,val_accuracy");
    for (const auto& r : h.records)
        csv.row(r.iteration, r.supervised_loss, r.continuity_loss, r.combined_loss, r.validation.mse,
                r.validation.mean_angle_diff, r.validation.accuracy);
    return csv.str();
}

/// Shared by train and finetune: loop, loss and optimizer flags.
class TrainingCommand : public Command {
protected:
    TrainingCommand(CLI::App& app, const std::string& name, const std::string& description, std::size_t iterations,
                    std::size_t eval_every)
        : Command(app, name, description), iterations_(iterations), eval_every_(eval_every) {
        option("data", data_, "dataset file")->required();
        option("out", out_, "checkpoint to write")->required();
        option("history", history_, "history CSV (default: <out>.history.csv)");
        option("iterations", iterations_, "training iterations");
        option("eval-every", eval_every_, "iterations between history records");
        option("batch-size", batch_, "labeled samples per iteration");
        option("unlabeled-length", unlabeled_length_, "contiguous unlabeled frames per iteration");
        option("lambda", lambda_, "continuity loss weight");
        option("alpha", alpha_, "similarity decay per frame (pairwise)");
        option("margin", margin_, "distance slack (pairwise)");
        option("variant", variant_, "triplet or pairwise");
        option("triplets", triplets_, "triplets sampled per unlabeled sequence");
        option("near-window", near_window_, "largest frame gap of a near sample");
        option("supervised-weight", supervised_weight_, "weight of the labeled term");
        flag("supervised-only", supervised_only_, "ignore unlabeled data (forces lambda = 0)");
        option("lr", lr_, "Adam learning rate");
        option("beta1", beta1_, "Adam beta1");
        option("beta2", beta2_, "Adam beta2");
        option("adam-eps", adam_eps_, "Adam epsilon");
        seed_option("run seed; init, labeled and unlabeled streams derive from it");
    }

    TrainConfig config() const {
        if (supervised_only_ && given("lambda") && lambda_ != 0.0)
            throw UsageError("--supervised-only conflicts with --lambda " + fmt(lambda_));
        TrainConfig c;
        c.iterations = iterations_;
        c.eval_every = eval_every_;
        c.labeled_batch_size = batch_;
        c.unlabeled_sequence_length = unlabeled_length_;
        c.loss.lambda = supervised_only_ ? 0.0 : lambda_;
        c.loss.alpha = alpha_;
        c.loss.margin = margin_;
        c.loss.variant = parse_variant(variant_);
        c.loss.triplet_samples_per_sequence = triplets_;
        c.loss.near_window = near_window_;
        c.loss.supervised_weight = supervised_weight_;
        c.optimizer = {lr_, beta1_, beta2_, adam_eps_};
        c.seeds = SeedStreams::from(seed_);
        return c;
    }

    struct Inputs {
        LabeledBatch labeled;
        std::vector<SampleSequence> unlabeled;
        LabeledBatch val;
    };

    /// Loads the dataset and rejects inconsistent settings before training.
    /// Without `input_dim` the model takes the dataset's feature dimension.
    Inputs load(TrainConfig& c, std::optional<Eigen::Index> input_dim) const {
        const Dataset ds = load_dataset(data_);
        if (input_dim && *input_dim != ds.feature_dim)
            throw UsageError("dataset feature_dim " + std::to_string(ds.feature_dim) + " does not match model input_dim " +
                             std::to_string(*input_dim));
        c.model.input_dim = ds.feature_dim;
        c.validate();
        Inputs in;
        in.labeled = gather_labeled(ds.train);
        if (c.loss.supervised_weight > 0.0 && in.labeled.features.cols() == 0)
            throw UsageError("dataset has no labeled training samples but supervised-weight > 0");
        if (c.loss.lambda > 0.0) {
            for (const auto& s : ds.train)
                if (s.size() >= 3) in.unlabeled.push_back(s);
            if (in.unlabeled.empty())
                throw UsageError("lambda > 0 but the dataset has no training sequence of 3 or more frames");
        }
        if (ds.val.empty()) throw UsageError("dataset has no validation sequences");
        in.val = gather_all(ds.val);
        return in;
    }

    void finish(const TrainResult& r, const TrainConfig& c, Clock::time_point t0) {
        if (history_.empty()) history_ = out_ + ".history.csv";
        save_checkpoint(out_, r.params);
        text::write_file_atomic(history_, history_csv(r.history));
        write_manifest(out_, *this, seconds_since(t0),
                       {{"seed_init", to_text(c.seeds.init)},
                        {"seed_labeled", to_text(c.seeds.labeled)},
                        {"seed_unlabeled", to_text(c.seeds.unlabeled)}});
        const auto& last = r.history.records.back().validation;
        std::cout << "mse=" << fmt(last.mse) << " angle_diff=" << fmt(last.mean_angle_diff)
                  << " accuracy=" << fmt(last.accuracy) << "\n";
    }

    std::string data_, out_, history_;
    std::size_t iterations_, eval_every_, batch_ = 64, unlabeled_length_ = 32, triplets_ = 32;
    double lambda_ = 0.1, alpha_ = 0.5, margin_ = 0.05, supervised_weight_ = 1.0;
    std::int64_t near_window_ = 3;
    std::string variant_ = "triplet";
    bool supervised_only_ = false;
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, adam_eps_ = 1e-8;
};

class Train : public TrainingCommand {
public:
    explicit Train(CLI::App& app) : TrainingCommand(app, "train", "Train a heading regressor from scratch", 2000, 100) {
        option("hidden", hidden_, "comma-separated hidden layer widths");
        option("activation", activation_, "tanh or relu");
        option("init-scale", init_scale_, "weight init scale");
    }

    int run() override {
        const auto t0 = Clock::now();
        auto c = config();
        try {
            c.model.activation = parse_activation(activation_);
        } catch (const InvalidArgument& e) {
            throw UsageError(std::string("--activation: ") + e.what());
        }
        c.model.hidden_dims = parse_hidden(hidden_);
        c.model.init_scale = init_scale_;
        const auto in = load(c, std::nullopt);
        finish(train_run(in.labeled, in.unlabeled, in.val, c), c, t0);
        return 0;
    }

private:
    std::string hidden_ = "32,32", activation_ = "tanh";
    double init_scale_ = 1.0;
};

class Finetune : public TrainingCommand {
public:
    explicit Finetune(CLI::App& app)
        : TrainingCommand(app, "finetune", "Continue training a checkpoint on new-domain data", 500, 50) {
        option("init", init_, "pretrained checkpoint")->required();
    }

    int run() override {
        const auto t0 = Clock::now();
        auto c = config();
        c.validate();
        const auto pretrained = load_checkpoint(init_);
        c.model = pretrained.config;
        const auto in = load(c, pretrained.config.input_dim);
        finish(finetune(pretrained, in.labeled, in.unlabeled, in.val, c), c, t0);
        return 0;
    }

private:
    std::string init_;
};

// -------------------------------------------------------------------- eval

class Eval : public Command {
public:
    explicit Eval(CLI::App& app) : Command(app, "eval", "Report MSE, mean AngleDiff and Accuracy@pi/8") {
        option("checkpoint", checkpoint_, "model to evaluate");
        flag("oracle", oracle_, "predict the true heading (debug upper bound)");
        option("data", data_, "dataset file");
        option("set", set_, "val (all validation samples) or train (labeled training samples)");
        option("circle", circle_, "write a two-revolution circle table to this CSV");
        option("circle-frames", circle_frames_, "frames on the circle");
        option("circle-radius", circle_radius_, "circle radius (m)");
        option("circle-seed", circle_seed_, "feature noise seed for the circle");
        option("feature-dim", domain_.feature_dim, "circle domain: feature dimension");
        option("max-frequency", domain_.max_frequency, "circle domain: largest Fourier frequency");
        option("noise", domain_.noise, "circle domain: feature noise std");
        option("domain-seed", domain_.domain_seed, "circle domain: appearance model seed");
        option("shift-seed", domain_.shift_seed, "circle domain: render in the shifted domain");
        option("shift-offset", domain_.shift_offset, "circle domain: shift offset std");
        option("shift-min-scale", domain_.shift_min_scale, "circle domain: smallest shift singular value");
        option("shift-max-scale", domain_.shift_max_scale, "circle domain: largest shift singular value");
        option("shift-noise-factor", domain_.shift_noise_factor, "circle domain: shifted noise multiplier");
        flag("shift-rotate", domain_.shift_rotate, "circle domain: rotating shift");
    }

    int run() override {
        const auto t0 = Clock::now();
        if (oracle_ == !checkpoint_.empty()) throw UsageError("give exactly one of --checkpoint and --oracle");
        if (data_.empty() && circle_.empty()) throw UsageError("nothing to evaluate: give --data and/or --circle");
        if (set_ != "val" && set_ != "train") throw UsageError("--set must be 'val' or 'train'");
        if (!circle_.empty() && circle_frames_ < 2) throw UsageError("--circle-frames must be >= 2");

        std::optional<RegressorParams> params;
        if (!oracle_) params = load_checkpoint(checkpoint_);
        const auto check_dim = [&](Eigen::Index d, const std::string& what) {
            if (params && params->config.input_dim != d)
                throw UsageError("checkpoint input_dim " + std::to_string(params->config.input_dim) + " does not match " +
                                 what + " feature_dim " + std::to_string(d));
        };

        std::optional<LabeledBatch> batch;
        if (!data_.empty()) {
            const auto ds = load_dataset(data_);
            check_dim(ds.feature_dim, "dataset");
            batch = set_ == "val" ? gather_all(ds.val) : gather_labeled(ds.train);
            if (batch->features.cols() == 0) throw UsageError("selected set has no labeled samples");
        }
        std::optional<DomainSpec> domain;
        if (!circle_.empty()) {
            domain = domain_.resolve();
            check_dim(domain->feature_dim(), "circle domain");
        }

        if (batch) {
            const auto m = params ? evaluate_model(*params, *batch) : evaluate_lenient(batch->labels, batch->labels);
            print("", m);
        }
        if (domain) {
            const auto report = circle_eval(params ? model_predictor(*params) : oracle_predictor(), *domain,
                                            circle_radius_, circle_frames_, circle_seed_);
            Csv csv("frame,x,y,theta_true,theta_pred");
            for (const auto& r : report.rows) csv.row(r.frame, r.x, r.y, r.theta_true, r.theta_pred);
            text::write_file_atomic(circle_, csv.str());
            print("circle ", report.metrics);
            write_manifest(circle_, *this, seconds_since(t0), {});
        }
        return 0;
    }

private:
    static void print(const std::string& prefix, const MetricsReport& m) {
        std::cout << prefix << "mse=" << fmt(m.mse) << " angle_diff=" << fmt(m.mean_angle_diff)
                  << " accuracy=" << fmt(m.accuracy) << "\n";
        if (m.degenerate())
            std::cerr << "tempocont: warning: " << m.n_degenerate << " of " << m.n_samples
                      << " predictions had no defined heading and were counted as wrong\n";
    }

    std::string checkpoint_, data_, set_ = "val", circle_;
    bool oracle_ = false;
    std::size_t circle_frames_ = 400;
    double circle_radius_ = 5.0;
    std::uint64_t circle_seed_ = 1;
    DomainFlags domain_;
};

// ------------------------------------------------------------------- sweep

class Sweep : public Command {
public:
    explicit Sweep(CLI::App& app) : Command(app, "sweep", "Run an experiment preset over several seeds") {
        option("preset", preset_, "label-fraction, four-setting, lambda or finetune")->required();
        option("out", out_, "results CSV")->required();
        option("seeds", seeds_, "comma-separated run seeds (default: five seeds from --seed)");
        seed_option("first of the five default run seeds");
        option("jobs", jobs_, "concurrent runs; results do not depend on it");
        option("fractions", fractions_, "label-fraction preset: fractions");
        option("lambdas", lambdas_, "lambda preset: continuity weights");
        option("lambda-fraction", lambda_fraction_, "lambda preset: labeled fraction");
        option("ssl-lambda", ssl_lambda_, "continuity weight of semi-supervised runs");
        option("target-fraction", target_fraction_, "labeled fraction of the target domain");
        option("source-data", source_data_, "source dataset file (default: generated)");
        option("target-data", target_data_, "target dataset file (default: generated)");
        option("iterations", iterations_, "training iterations on the source domain");
        option("eval-every", eval_every_, "iterations between records on the source domain");
        option("tune-iterations", tune_iterations_, "fine-tuning iterations");
        option("tune-eval-every", tune_eval_every_, "iterations between fine-tuning records");
        option("batch-size", batch_, "labeled samples per iteration");
        option("unlabeled-length", unlabeled_length_, "contiguous unlabeled frames per iteration");
        option("variant", variant_, "triplet or pairwise");
        option("hidden", hidden_, "comma-separated hidden layer widths");
        option("lr", lr_, "Adam learning rate");
        option("sequences", sequences_, "generated training sequences per domain");
        option("val-sequences", val_sequences_, "generated validation sequences per domain");
        option("length", length_, "generated frames per sequence");
        option("heading-spread", spread_, "std of start headings; negative = uniform");
        option("source-seed", source_seed_, "generated source dataset seed");
        option("target-seed", target_seed_, "generated target dataset seed");
        option("feature-dim", domain_.feature_dim, "feature dimension");
        option("max-frequency", domain_.max_frequency, "largest Fourier frequency");
        option("noise", domain_.noise, "feature noise std");
        option("domain-seed", domain_.domain_seed, "appearance model seed");
        option("shift-seed", shift_seed_, "domain shift seed");
        option("shift-offset", domain_.shift_offset, "shift offset std");
        option("shift-min-scale", domain_.shift_min_scale, "smallest shift singular value");
        option("shift-max-scale", domain_.shift_max_scale, "largest shift singular value");
        option("shift-noise-factor", domain_.shift_noise_factor, "shifted noise multiplier");
        flag("shift-rotate", domain_.shift_rotate, "mix features with a second rotation");
    }

    int run() override {
        const auto t0 = Clock::now();
        const bool needs_target = preset_ == "four-setting" || preset_ == "finetune";
        if (!needs_target && preset_ != "label-fraction" && preset_ != "lambda")
            throw UsageError("unknown preset '" + preset_ + "'");
        const auto c = config();
        c.train.validate();
        c.tune.validate();
        std::vector<std::uint64_t> seeds;
        if (seeds_.empty())
            for (std::uint64_t k = 0; k < 5; ++k) seeds.push_back(seed_ + k);
        else
            seeds = parse_uint_list(seeds_, "seeds");
        if (seeds.empty()) throw UsageError("--seeds is empty");
        if (!needs_target && !target_data_.empty()) throw UsageError("--target-data is not used by preset " + preset_);
        if (needs_target && source_data_.empty() != target_data_.empty())
            throw UsageError("give both --source-data and --target-data, or neither");

        const auto data = experiment_data(c, needs_target);
        Csv csv = run_preset(c, seeds, data);
        text::write_file_atomic(out_, csv.str());
        write_manifest(out_, *this, seconds_since(t0), {});
        return 0;
    }

private:
    ExperimentConfig config() const {
        auto c = ExperimentConfig::defaults();
        c.domain = domain_.options();
        c.domain_seed = domain_.domain_seed;
        c.shift_seed = shift_seed_;
        c.shift = domain_.shift();
        c.source.train_sequences = c.target.train_sequences = sequences_;
        c.source.val_sequences = c.target.val_sequences = val_sequences_;
        c.source.sequence_length = c.target.sequence_length = length_;
        c.source.trajectory.heading_spread.reset();
        if (spread_ >= 0.0) c.source.trajectory.heading_spread = spread_;
        c.target.trajectory = c.source.trajectory;
        c.source.seed = source_seed_;
        c.target.seed = target_seed_;
        c.target.label_fraction = target_fraction_;
        const auto hidden = parse_hidden(hidden_);
        const auto variant = parse_variant(variant_);
        for (auto* t : {&c.train, &c.tune}) {
            t->model.input_dim = c.domain.feature_dim;
            t->model.hidden_dims = hidden;
            t->labeled_batch_size = batch_;
            t->unlabeled_sequence_length = unlabeled_length_;
            t->loss.variant = variant;
            t->optimizer.learning_rate = lr_;
        }
        c.train.iterations = iterations_;
        c.train.eval_every = eval_every_;
        c.tune.iterations = tune_iterations_;
        c.tune.eval_every = tune_eval_every_;
        c.ssl_lambda = ssl_lambda_;
        c.lambda_sweep_fraction = lambda_fraction_;
        c.jobs = jobs_;
        return c;
    }

    ExperimentData experiment_data(const ExperimentConfig& c, bool needs_target) const {
        if (source_data_.empty()) return build_experiment_data(c);
        ExperimentData d;
        d.source = load_dataset(source_data_);
        if (needs_target) {
            d.target = load_dataset(target_data_);
            if (d.target.feature_dim != d.source.feature_dim)
                throw UsageError("source and target datasets differ in feature_dim");
        }
        if (d.source.val.empty() || (needs_target && d.target.val.empty()))
            throw UsageError("datasets need validation sequences");
        return d;
    }

    Csv run_preset(ExperimentConfig c, const std::vector<std::uint64_t>& seeds, const ExperimentData& data) const {
        c.train.model.input_dim = c.tune.model.input_dim = data.source.feature_dim;
        if (preset_ == "label-fraction") {
            Csv csv("fraction,method,seed,final_val_mse");
            for (const auto& r : label_fraction_sweep(parse_double_list(fractions_, "fractions"), seeds, c, data))
                csv.row(r.fraction, r.method, r.seed, r.final_val_mse);
            return csv;
        }
        if (preset_ == "lambda") {
            Csv csv("lambda,seed,final_val_mse,seq_output_std");
            for (const auto& r : lambda_sweep(parse_double_list(lambdas_, "lambdas"), c, seeds, data))
                csv.row(r.lambda, r.seed, r.final_val_mse, r.seq_output_std);
            return csv;
        }
        if (preset_ == "four-setting") {
            auto rows = four_setting_experiment(c, seeds, data);
            std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.setting < b.setting; });
            Csv csv("setting,seed,iteration,val_loss");
            for (const auto& r : rows)
                for (const auto& h : r.history.records) csv.row(r.setting, r.seed, h.iteration, h.validation.mse);
            return csv;
        }
        Csv csv("method,seed,val_mse,val_angle_diff,val_accuracy");
        for (const auto& r : finetune_comparison(c, seeds, data))
            csv.row(r.method, r.seed, r.validation.mse, r.validation.mean_angle_diff, r.validation.accuracy);
        return csv;
    }

    std::string preset_, out_, seeds_, fractions_ = "0.01,0.1,1", lambdas_ = "0,0.1,10";
    std::string source_data_, target_data_, variant_ = "triplet", hidden_ = "32,32";
    unsigned jobs_ = 1;
    double lambda_fraction_ = 0.1, ssl_lambda_ = 0.1, target_fraction_ = 0.012, lr_ = 1e-3, spread_ = 0.3;
    std::size_t iterations_ = 2000, eval_every_ = 100, tune_iterations_ = 500, tune_eval_every_ = 50;
    std::size_t batch_ = 64, unlabeled_length_ = 32, sequences_ = 50, val_sequences_ = 10, length_ = 500;
    std::uint64_t source_seed_ = 101, target_seed_ = 202, shift_seed_ = 17;
    DomainFlags domain_;
};

// ----------------------------------------------------------------- raycast

class Raycast : public Command {
public:
    explicit Raycast(CLI::App& app) : Command(app, "raycast", "Ground position and world heading of a detection") {
        option("camera", camera_, "camera key=value file")->required();
        option("bbox", bbox_, "u_min,v_min,u_max,v_max in pixels")->required();
        option("theta-img", theta_img_, "image-space heading (rad)")->required();
        option("epsilon", epsilon_, "pixel step of the heading construction");
    }

    int run() override {
        const auto b = parse_double_list(bbox_, "bbox");
        if (b.size() != 4) throw UsageError("--bbox needs four comma-separated numbers");
        const auto cam = load_camera(camera_);
        const BoundingBox box{b[0], b[1], b[2], b[3]};
        const auto foot = bbox_foot_pixel(box);
        const auto ground = pixel_to_ground(cam, foot);
        const double theta_w = image_heading_to_world(cam, foot, theta_img_, epsilon_);
        std::cout << "x=" << fmt(ground.x()) << " y=" << fmt(ground.y()) << " theta_w=" << fmt(theta_w) << "\n";
        return 0;
    }

private:
    std::string camera_, bbox_;
    double theta_img_ = 0.0, epsilon_ = 1.0;
};

int fail(int code, const std::string& message) {
    std::cerr << "tempocont: error: " << message << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app("Semi-supervised heading regression with temporal continuity", "tempocont");
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    std::vector<std::unique_ptr<Command>> commands;
    commands.push_back(std::make_unique<GenData>(app));
    commands.push_back(std::make_unique<Train>(app));
    commands.push_back(std::make_unique<Finetune>(app));
    commands.push_back(std::make_unique<Eval>(app));
    commands.push_back(std::make_unique<Sweep>(app));
    commands.push_back(std::make_unique<Raycast>(app));

    try {
        std::vector<std::string> args = expand_config(std::vector<std::string>(argv, argv + argc), app);
        std::vector<char*> raw;
        for (auto& a : args) raw.push_back(a.data());
        try {
            app.parse(static_cast<int>(raw.size()), raw.data());
        } catch (const CLI::ParseError& e) {
            return app.exit(e) == 0 ? 0 : 2;
        }
        for (auto& c : commands)
            if (c->app()->parsed()) return c->run();
        return fail(2, "no command given");
    } catch (const UsageError& e) {
        return fail(2, e.what());
    } catch (const InvalidArgument& e) {
        return fail(2, e.what());
    } catch (const DomainError& e) {
        return fail(3, e.what());
    } catch (const IoError& e) {
        return fail(1, e.what());
    } catch (const std::exception& e) {
        return fail(1, e.what());
    }
}
