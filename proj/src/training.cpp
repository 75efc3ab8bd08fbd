#include "mns/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mns/rng.hpp"

namespace mns {

namespace {

std::size_t argmax_index(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy(x.row(idx[i]).begin(), x.row(idx[i]).end(), out.row(i).begin());
    return out;
}

} // namespace

PairEvaluation evaluate_pairs(const MlpModel& model, const Matrix& X,
                              const SimilarityPairBatch& pairs, const TransitionMatrix* t,
                              double tau, double pos_weight) {
    if (pairs.pairs.empty()) throw std::invalid_argument("evaluate_pairs: empty pair list");
    const Matrix g = softmax_rows(model.forward_logits(X));
    const Matrix f = t ? matmul(g, t->matrix()) : g;

    const PairLossOptions opts{pos_weight};
    double loss_sum = 0.0;
    std::size_t wrong_threshold = 0, wrong_argmax = 0;
    for (const auto& p : pairs.pairs) {
        const auto fa = f.row(p.a), fb = f.row(p.b);
        const double s_hat = dot(fa, fb);
        const double lo = kSimilarityClamp, hi = 1.0 - kSimilarityClamp;
        const double sc = std::clamp(s_hat, lo, hi);
        loss_sum += p.s == 1 ? -opts.pos_weight * std::log(sc) : -std::log(1.0 - sc);
        const int pred = s_hat > tau ? 1 : 0;
        wrong_threshold += static_cast<std::size_t>(pred != p.s);
        const int pred_arg = argmax_index(fa) == argmax_index(fb) ? 1 : 0;
        wrong_argmax += static_cast<std::size_t>(pred_arg != p.s);
    }
    const double inv = 1.0 / static_cast<double>(pairs.pairs.size());
    return {loss_sum * inv, static_cast<double>(wrong_threshold) * inv,
            static_cast<double>(wrong_argmax) * inv};
}

TrainResult fit_pair_model(const Matrix& x_train, const std::vector<int>& train_noisy_labels,
                           const Matrix& x_val, const SimilarityPairBatch& val_pairs,
                           const TransitionMatrix* t, const TrainConfig& cfg,
                           std::uint64_t seed, const MlpModel* warm_start) {
    if (x_train.rows() != train_noisy_labels.size())
        throw std::invalid_argument("fit_pair_model: feature/label count mismatch");
    if (x_train.rows() < 2) throw std::invalid_argument("fit_pair_model: need >= 2 examples");
    if (cfg.num_classes < 2) throw std::invalid_argument("fit_pair_model: num_classes not set");
    if (cfg.epochs < 1 || cfg.batch_size < 2)
        throw std::invalid_argument("fit_pair_model: epochs >= 1 and batch_size >= 2 required");
    if (t && t->num_classes() != cfg.num_classes)
        throw std::invalid_argument("fit_pair_model: T size != num_classes");

    std::vector<std::size_t> widths;
    widths.push_back(x_train.cols());
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(cfg.num_classes);

    MlpModel model = warm_start ? *warm_start
                                : MlpModel::init(widths, cfg.activation, cfg.with_bias,
                                                 derive_seed(seed, 1));
    if (warm_start &&
        (model.input_dim() != x_train.cols() || model.num_classes() != cfg.num_classes))
        throw std::invalid_argument("fit_pair_model: warm-start model shape mismatch");
    AdamState adam = AdamState::init(model, cfg.optimizer.adam);
    Rng shuffle_rng(derive_seed(seed, 2));
    Rng pairing_rng(derive_seed(seed, 3));

    const double tau = cfg.tau > 0.0 ? cfg.tau : 1.0 / static_cast<double>(cfg.num_classes);
    const PairLossOptions loss_opts{cfg.pos_weight};

    std::vector<std::size_t> order(x_train.rows());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    double best = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const std::size_t decays =
            cfg.optimizer.decay_every == 0 ? 0 : (epoch - 1) / cfg.optimizer.decay_every;
        adam.params.learning_rate =
            cfg.optimizer.adam.learning_rate * std::pow(cfg.optimizer.decay_factor,
                                                        static_cast<double>(decays));

        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t pair_count = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, order.size() - start);
            if (len < 2) continue;  // a trailing singleton contributes no pair
            const std::span<const std::size_t> idx(order.data() + start, len);

            const Matrix xb = gather_rows(x_train, idx);
            std::vector<int> yb(len);
            for (std::size_t i = 0; i < len; ++i) yb[i] = train_noisy_labels[idx[i]];

            PairingStrategy strat = cfg.pairing;
            if (strat.kind == PairingStrategy::Kind::sampled)
                strat.sample_count = std::min(strat.sample_count, len * (len - 1) / 2);
            const SimilarityPairBatch batch_pairs =
                make_similarity_pairs(yb, strat, pairing_rng.raw());

            const BatchPairLoss bl = batch_pair_loss(model, xb, batch_pairs, t, loss_opts);
            if (!std::isfinite(bl.mean_loss))
                throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
            loss_sum += bl.mean_loss * static_cast<double>(batch_pairs.size());
            pair_count += batch_pairs.size();
            adam_step(model, bl.grads, adam);
        }

        EpochRecord rec;
        rec.train_loss = pair_count ? loss_sum / static_cast<double>(pair_count) : 0.0;
        rec.learning_rate = adam.params.learning_rate;
        const PairEvaluation ev =
            evaluate_pairs(model, x_val, val_pairs, t, tau, cfg.pos_weight);
        rec.val_loss = ev.loss;
        rec.val_pair_error = ev.error_threshold;
        rec.val_pair_error_argmax = ev.error_argmax;
        result.curves.push_back(rec);

        const double criterion =
            cfg.selection == SelectionCriterion::val_loss ? rec.val_loss : rec.val_pair_error;
        if (criterion < best) {
            best = criterion;
            result.model = model;
            result.selected_epoch = epoch;
        }
    }
    return result;
}

} // namespace mns
