#pragma once

#include <cstdint>
#include <vector>

#include "mns/matrix.hpp"
#include "mns/nn.hpp"
#include "mns/noise.hpp"
#include "mns/training.hpp"

namespace mns {

struct AnchorScore {
    std::size_t index = 0;  // position in the candidate pool
    double score = 0.0;     // posterior mass the model puts on the class
};

/// Per-class anchor candidates, scores sorted descending. Selection keeps
/// the feature rows so the transition estimate can re-evaluate the model on
/// them without the original pool.
struct AnchorSelection {
    std::vector<std::vector<AnchorScore>> per_class;
    std::vector<Matrix> features_per_class;  // rows aligned with per_class entries
    std::size_t k = 0;
};

struct AnchorConfig {
    std::size_t k = 5;
    double percentile = 0.0;  // 0 = take the top-k; e.g. 97 starts at the 97th percentile
};

/// Stage 1: fit the noisy-class posterior with the uncorrected pair loss
/// (no transition layer), selecting the checkpoint with minimum validation
/// pair loss.
TrainResult train_noisy_posterior(const Matrix& x_train,
                                  const std::vector<int>& train_noisy_labels,
                                  const Matrix& x_val, const SimilarityPairBatch& val_pairs,
                                  TrainConfig cfg, std::uint64_t seed);

/// Picks, for each class, the pool examples the model scores highest for
/// that class. An example can anchor only its argmax class; ties break
/// toward the lowest index. Throws when some class has no candidate.
AnchorSelection select_anchors(const MlpModel& model, const Matrix& pool,
                               const AnchorConfig& cfg);

/// Row i of the estimate is the model's mean posterior over the class-i
/// anchors, re-normalized against numeric drift.
TransitionMatrix estimate_transition(const MlpModel& model, const AnchorSelection& anchors);

/// epsilon = ||T - T_hat||_1 / ||T||_1, entrywise.
double estimation_error(const TransitionMatrix& t, const TransitionMatrix& t_hat);

struct EstimationReport {
    TransitionMatrix t_hat;
    double epsilon = -1.0;  // negative when the true T is unknown
    AnchorSelection anchors;
};

} // namespace mns
