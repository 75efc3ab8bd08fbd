#include "mns/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mns/io.hpp"
#include "mns/rng.hpp"

namespace mns {

namespace {

// Seed streams hanging off the experiment master seed.
enum : std::uint64_t {
    kStreamBlobsTrain = 10,
    kStreamBlobsTest = 11,
    kStreamCorrupt = 12,
    kStreamSplit = 13,
    kStreamValPairs = 14,
    kStreamStageOne = 15,
    kStreamStageTwo = 16,
};

} // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::mcl: return "mcl";
        case Method::mns_estimated_t: return "mns_estimated_t";
        case Method::mns_true_t: return "mns_true_t";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "mcl") return Method::mcl;
    if (name == "mns_estimated_t") return Method::mns_estimated_t;
    if (name == "mns_true_t") return Method::mns_true_t;
    throw std::invalid_argument("unknown method: " + name);
}

void ExperimentConfig::validate() const {
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw std::invalid_argument("validation_fraction must lie in (0,1)");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0,1)");
    if (data.kind == DatasetSpec::Kind::file &&
        (data.train_file.empty() || data.test_file.empty()))
        throw std::invalid_argument("file dataset needs train_file and test_file");
}

namespace {

struct PreparedData {
    Matrix x_train;
    std::vector<int> noisy_train;
    Matrix x_val;
    SimilarityPairBatch val_pairs;
    LabeledDataset test;
    TransitionMatrix t_true;
    std::size_t num_classes = 0;
};

PreparedData prepare_data(const ExperimentConfig& cfg) {
    LabeledDataset pool, test;
    if (cfg.data.kind == DatasetSpec::Kind::blobs) {
        BlobsConfig bc = cfg.data.blobs;
        bc.seed = derive_seed(cfg.seed, kStreamBlobsTrain);
        bc.split = Split::train;
        pool = gaussian_blobs(bc);
        bc.per_class = cfg.data.test_per_class;
        bc.seed = derive_seed(cfg.seed, kStreamBlobsTest);
        bc.split = Split::test;
        test = gaussian_blobs(bc);
    } else {
        pool = read_dataset(cfg.data.train_file);
        pool.split = Split::train;
        test = read_dataset(cfg.data.test_file);
        test.split = Split::test;
        if (pool.num_classes != test.num_classes)
            throw std::runtime_error("data: train/test class counts differ");
    }

    PreparedData out;
    out.num_classes = pool.num_classes;
    out.t_true = symmetric_transition(pool.num_classes, cfg.rho);
    const std::vector<int> noisy =
        corrupt_labels(pool, out.t_true, derive_seed(cfg.seed, kStreamCorrupt));

    // Shuffled split: the first chunk becomes the validation set.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(cfg.seed, kStreamSplit));
    split_rng.shuffle(order);
    const auto val_n = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(cfg.validation_fraction *
                                                 static_cast<double>(pool.size()))));
    if (val_n >= pool.size())
        throw std::runtime_error("data: validation fraction leaves no training data");

    out.x_val = Matrix(val_n, pool.dim());
    std::vector<int> noisy_val(val_n);
    for (std::size_t i = 0; i < val_n; ++i) {
        const auto src = pool.X.row(order[i]);
        std::copy(src.begin(), src.end(), out.x_val.row(i).begin());
        noisy_val[i] = noisy[order[i]];
    }
    const std::size_t train_n = pool.size() - val_n;
    out.x_train = Matrix(train_n, pool.dim());
    out.noisy_train.resize(train_n);
    for (std::size_t i = 0; i < train_n; ++i) {
        const auto src = pool.X.row(order[val_n + i]);
        std::copy(src.begin(), src.end(), out.x_train.row(i).begin());
        out.noisy_train[i] = noisy[order[val_n + i]];
    }

    const std::size_t all_val_pairs = val_n * (val_n - 1) / 2;
    const PairingStrategy strat = all_val_pairs <= cfg.val_pairs_cap
                                      ? PairingStrategy::all_pairs()
                                      : PairingStrategy::sampled(cfg.val_pairs_cap);
    out.val_pairs =
        make_similarity_pairs(noisy_val, strat, derive_seed(cfg.seed, kStreamValPairs));
    out.test = std::move(test);
    return out;
}

std::vector<std::pair<std::string, std::string>> echo_config(const ExperimentConfig& cfg,
                                                             std::size_t num_classes) {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("method", method_name(cfg.method));
    e.emplace_back("seed", std::to_string(cfg.seed));
    e.emplace_back("rho", format_double(cfg.rho));
    e.emplace_back("num_classes", std::to_string(num_classes));
    if (cfg.data.kind == DatasetSpec::Kind::blobs) {
        e.emplace_back("data.kind", "blobs");
        e.emplace_back("data.per_class", std::to_string(cfg.data.blobs.per_class));
        e.emplace_back("data.dim", std::to_string(cfg.data.blobs.dim));
        e.emplace_back("data.separation", format_double(cfg.data.blobs.separation));
        e.emplace_back("data.spread", format_double(cfg.data.blobs.spread));
        e.emplace_back("data.test_per_class", std::to_string(cfg.data.test_per_class));
    } else {
        e.emplace_back("data.kind", "file");
        e.emplace_back("data.train_file", cfg.data.train_file);
        e.emplace_back("data.test_file", cfg.data.test_file);
    }
    std::string hid;
    for (std::size_t h : cfg.train.hidden) hid += (hid.empty() ? "" : ",") + std::to_string(h);
    e.emplace_back("model.hidden", hid);
    e.emplace_back("model.activation", activation_name(cfg.train.activation));
    e.emplace_back("model.with_bias", cfg.train.with_bias ? "true" : "false");
    e.emplace_back("optimizer.learning_rate",
                   format_double(cfg.train.optimizer.adam.learning_rate));
    e.emplace_back("optimizer.decay_every", std::to_string(cfg.train.optimizer.decay_every));
    e.emplace_back("optimizer.decay_factor", format_double(cfg.train.optimizer.decay_factor));
    e.emplace_back("train.batch_size", std::to_string(cfg.train.batch_size));
    e.emplace_back("train.epochs", std::to_string(cfg.train.epochs));
    e.emplace_back("train.tau", format_double(cfg.train.tau));
    e.emplace_back("train.pos_weight", format_double(cfg.train.pos_weight));
    e.emplace_back("train.pairing", cfg.train.pairing.kind == PairingStrategy::Kind::all_pairs
                                        ? "all_pairs"
                                        : "sampled:" + std::to_string(cfg.train.pairing.sample_count));
    e.emplace_back("anchors.k", std::to_string(cfg.anchors.k));
    e.emplace_back("anchors.percentile", format_double(cfg.anchors.percentile));
    e.emplace_back("validation_fraction", format_double(cfg.validation_fraction));
    e.emplace_back("warm_start", cfg.warm_start ? "true" : "false");
    return e;
}

} // namespace

ExperimentOutcome run_algorithm1(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    PreparedData data = prepare_data(cfg);
    TrainConfig tc = cfg.train;
    tc.num_classes = data.num_classes;

    ExperimentReport report;
    report.method = cfg.method;
    report.seed = cfg.seed;
    report.rho = cfg.rho;
    report.t_true = data.t_true.matrix();
    report.config_echo = echo_config(cfg, data.num_classes);

    // Stage 1: learn the noisy posterior and estimate the transition matrix.
    std::optional<TransitionMatrix> t_hat;
    MlpModel stage1_model;
    if (cfg.method == Method::mns_estimated_t) {
        if (cfg.t_hat_override.has_value()) {
            t_hat = TransitionMatrix::from_matrix(*cfg.t_hat_override);
        } else {
            TrainConfig s1 = tc;
            s1.selection = SelectionCriterion::val_loss;
            TrainResult stage1;
            try {
                stage1 = fit_pair_model(data.x_train, data.noisy_train, data.x_val,
                                        data.val_pairs, nullptr, s1,
                                        derive_seed(cfg.seed, kStreamStageOne));
            } catch (const std::exception& e) {
                throw std::runtime_error(std::string("stage1: ") + e.what());
            }
            report.stage1_curves = stage1.curves;
            report.stage1_selected_epoch = stage1.selected_epoch;
            stage1_model = stage1.model;
            const AnchorSelection anchors = select_anchors(stage1.model, data.x_train,
                                                           cfg.anchors);
            t_hat = estimate_transition(stage1.model, anchors);
        }
        report.t_hat = t_hat->matrix();
        report.epsilon = estimation_error(data.t_true, *t_hat);
        const double degenerate_floor = 1.0 / static_cast<double>(data.num_classes) + 1e-6;
        for (std::size_t i = 0; i < t_hat->num_classes(); ++i) {
            const auto row = t_hat->row(i);
            if (*std::max_element(row.begin(), row.end()) < degenerate_floor)
                report.warnings.push_back("degenerate T_hat row " + std::to_string(i + 1));
        }
    } else if (cfg.method == Method::mns_true_t) {
        t_hat = data.t_true;
        report.t_hat = t_hat->matrix();
    }

    // Stage 2: learn the classifier under the fixed transition layer.
    const TransitionMatrix* t_layer =
        cfg.method == Method::mcl ? nullptr : &t_hat.value();
    TrainResult stage2;
    try {
        const MlpModel* warm = cfg.warm_start && cfg.method == Method::mns_estimated_t &&
                                       !cfg.t_hat_override.has_value()
                                   ? &stage1_model
                                   : nullptr;
        stage2 = fit_pair_model(data.x_train, data.noisy_train, data.x_val, data.val_pairs,
                                t_layer, tc, derive_seed(cfg.seed, kStreamStageTwo), warm);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("stage2: ") + e.what());
    }
    report.stage2_curves = stage2.curves;
    report.stage2_selected_epoch = stage2.selected_epoch;

    const Evaluation ev = evaluate_classifier(stage2.model, data.test);
    report.test_accuracy = ev.accuracy;
    report.confusion = ev.confusion;

    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(report), std::move(stage2.model)};
}

Evaluation evaluate_classifier(const MlpModel& model, const LabeledDataset& test) {
    if (test.size() == 0) throw std::invalid_argument("evaluate_classifier: empty test set");
    test.validate();
    const std::size_t c = model.num_classes();
    if (test.num_classes > c)
        throw std::invalid_argument("evaluate_classifier: more classes than model outputs");

    const Matrix logits = model.forward_logits(test.X);
    Evaluation ev;
    ev.confusion = Matrix(c, c);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto row = logits.row(i);
        const std::size_t pred =
            static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        const auto truth = static_cast<std::size_t>(test.labels[i] - 1);
        ev.confusion(truth, pred) += 1.0;
        correct += static_cast<std::size_t>(pred == truth);
    }
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    return ev;
}

void BoundInputs::validate() const {
    if (!(input_norm_bound > 0.0)) throw std::invalid_argument("bound: B must be positive");
    if (num_classes < 1) throw std::invalid_argument("bound: C must be positive");
    if (depth < 1) throw std::invalid_argument("bound: depth must be positive");
    if (frobenius_bounds.size() != depth)
        throw std::invalid_argument("bound: need one Frobenius bound per layer");
    for (double m : frobenius_bounds)
        if (!(m > 0.0)) throw std::invalid_argument("bound: M_i must be positive");
    if (!(loss_bound > 0.0)) throw std::invalid_argument("bound: M must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bound: delta not in (0,1)");
    if (sample_size < 1) throw std::invalid_argument("bound: n must be positive");
}

double generalization_bound(const BoundInputs& in) {
    in.validate();
    double prod = 1.0;
    for (double m : in.frobenius_bounds) prod *= m;
    const double n = static_cast<double>(in.sample_size);
    const double first = 2.0 * in.input_norm_bound * static_cast<double>(in.num_classes) *
                         (std::sqrt(2.0 * static_cast<double>(in.depth) * std::log(2.0)) + 1.0) *
                         prod / std::sqrt(n);
    const double second = in.loss_bound * std::sqrt(std::log(1.0 / in.delta) / (2.0 * n));
    return first + second;
}

std::vector<double> frobenius_norms(const MlpModel& model) {
    std::vector<double> norms;
    norms.reserve(model.depth());
    for (const auto& l : model.layers()) norms.push_back(frobenius_norm(l.weight));
    return norms;
}

double max_input_norm(const Matrix& x) {
    double best = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (double v : x.row(i)) s += v * v;
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

} // namespace mns
