#pragma once

#include <cstdint>
#include <vector>

#include "mns/nn.hpp"
#include "mns/noise.hpp"
#include "mns/objective.hpp"

namespace mns {

struct OptimizerConfig {
    AdamParams adam;               // learning_rate is the initial rate
    std::size_t decay_every = 10;  // epochs between step decays; 0 disables
    double decay_factor = 0.1;
};

enum class SelectionCriterion { val_loss, val_pair_error };

struct TrainConfig {
    std::vector<std::size_t> hidden = {64, 64};
    Activation activation = Activation::relu;
    bool with_bias = true;
    std::size_t num_classes = 0;
    OptimizerConfig optimizer;
    std::size_t batch_size = 128;
    std::size_t epochs = 30;
    PairingStrategy pairing;     // within-batch pairing
    double tau = 0.0;            // pair decision threshold; <=0 means 1/C
    double pos_weight = 1.0;
    SelectionCriterion selection = SelectionCriterion::val_pair_error;
};

struct EpochRecord {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_pair_error = 0.0;         // threshold rule: predict 1 iff s_hat > tau
    double val_pair_error_argmax = 0.0;  // argmax-agreement rule, logged only
    double learning_rate = 0.0;
};

struct TrainResult {
    MlpModel model;                  // checkpoint from the selected epoch
    std::size_t selected_epoch = 0;  // 1-based
    std::vector<EpochRecord> curves;
};

struct PairEvaluation {
    double loss = 0.0;
    double error_threshold = 0.0;
    double error_argmax = 0.0;
};

/// Pair loss and the two pair-classification error rates of `model` on a
/// materialized pair set. `t` selects the forward-corrected predictor.
PairEvaluation evaluate_pairs(const MlpModel& model, const Matrix& X,
                              const SimilarityPairBatch& pairs, const TransitionMatrix* t,
                              double tau, double pos_weight = 1.0);

/// Minibatch trainer shared by both stages of the learning algorithm: pairs
/// are enumerated within each shuffled minibatch, the pair loss (corrected
/// when `t` is given) is minimized with Adam under a step-decay schedule,
/// and the checkpoint minimizing the configured validation criterion is
/// returned. Deterministic given the seed. Throws std::runtime_error with
/// the epoch index if the loss turns non-finite. `warm_start`, when given,
/// replaces the fresh seeded initialization.
TrainResult fit_pair_model(const Matrix& x_train, const std::vector<int>& train_noisy_labels,
                           const Matrix& x_val, const SimilarityPairBatch& val_pairs,
                           const TransitionMatrix* t, const TrainConfig& cfg,
                           std::uint64_t seed, const MlpModel* warm_start = nullptr);

} // namespace mns
