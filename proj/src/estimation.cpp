#include "mns/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mns {

TrainResult train_noisy_posterior(const Matrix& x_train,
                                  const std::vector<int>& train_noisy_labels,
                                  const Matrix& x_val, const SimilarityPairBatch& val_pairs,
                                  TrainConfig cfg, std::uint64_t seed) {
    cfg.selection = SelectionCriterion::val_loss;
    return fit_pair_model(x_train, train_noisy_labels, x_val, val_pairs, /*t=*/nullptr, cfg,
                          seed);
}

AnchorSelection select_anchors(const MlpModel& model, const Matrix& pool,
                               const AnchorConfig& cfg) {
    const std::size_t c = model.num_classes();
    if (cfg.k < 1) throw std::invalid_argument("select_anchors: k must be positive");
    if (pool.rows() < cfg.k * c)
        throw std::invalid_argument("select_anchors: pool smaller than k per class");

    const Matrix posterior = softmax_rows(model.forward_logits(pool));

    // Assign each example to its argmax class; lowest index wins score ties
    // because the stable sort below sees candidates in pool order.
    std::vector<std::vector<AnchorScore>> candidates(c);
    for (std::size_t i = 0; i < pool.rows(); ++i) {
        const auto row = posterior.row(i);
        const std::size_t cls =
            static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        candidates[cls].push_back({i, row[cls]});
    }

    AnchorSelection sel;
    sel.k = cfg.k;
    sel.per_class.resize(c);
    sel.features_per_class.resize(c);
    for (std::size_t cls = 0; cls < c; ++cls) {
        auto& cand = candidates[cls];
        if (cand.empty())
            throw std::runtime_error("select_anchors: no candidate has argmax class " +
                                     std::to_string(cls + 1));
        std::stable_sort(cand.begin(), cand.end(),
                         [](const AnchorScore& a, const AnchorScore& b) {
                             return a.score > b.score;
                         });
        std::size_t start = 0;
        if (cfg.percentile > 0.0) {
            // Skip the extreme top scores; start at the given percentile.
            const double frac = 1.0 - cfg.percentile / 100.0;
            start = std::min(cand.size() - 1,
                             static_cast<std::size_t>(frac * static_cast<double>(cand.size())));
        }
        const std::size_t take = std::min(cfg.k, cand.size() - start);
        sel.per_class[cls].assign(cand.begin() + static_cast<std::ptrdiff_t>(start),
                                  cand.begin() + static_cast<std::ptrdiff_t>(start + take));
        Matrix feats(take, pool.cols());
        for (std::size_t j = 0; j < take; ++j) {
            const auto src = pool.row(sel.per_class[cls][j].index);
            std::copy(src.begin(), src.end(), feats.row(j).begin());
        }
        sel.features_per_class[cls] = std::move(feats);
    }
    return sel;
}

TransitionMatrix estimate_transition(const MlpModel& model, const AnchorSelection& anchors) {
    const std::size_t c = model.num_classes();
    if (anchors.per_class.size() != c)
        throw std::invalid_argument("estimate_transition: anchor classes != model classes");
    for (std::size_t cls = 0; cls < c; ++cls)
        if (anchors.per_class[cls].empty())
            throw std::invalid_argument("estimate_transition: class " + std::to_string(cls + 1) +
                                        " has no anchors");

    Matrix t_hat(c, c);
    for (std::size_t cls = 0; cls < c; ++cls) {
        const Matrix posterior =
            softmax_rows(model.forward_logits(anchors.features_per_class[cls]));
        if (!all_finite(posterior))
            throw std::invalid_argument("estimate_transition: non-finite anchor posterior");
        const double inv = 1.0 / static_cast<double>(posterior.rows());
        for (std::size_t i = 0; i < posterior.rows(); ++i)
            for (std::size_t j = 0; j < c; ++j) t_hat(cls, j) += posterior(i, j) * inv;
        // Rows are means of simplex vectors; renormalize away rounding drift.
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += t_hat(cls, j);
        for (std::size_t j = 0; j < c; ++j) t_hat(cls, j) /= sum;
    }
    return TransitionMatrix::from_matrix(std::move(t_hat));
}

double estimation_error(const TransitionMatrix& t, const TransitionMatrix& t_hat) {
    if (t.num_classes() != t_hat.num_classes())
        throw std::invalid_argument("estimation_error: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < t.num_classes(); ++i)
        for (std::size_t j = 0; j < t.num_classes(); ++j) {
            num += std::abs(t(i, j) - t_hat(i, j));
            den += std::abs(t(i, j));
        }
    return num / den;
}

} // namespace mns
