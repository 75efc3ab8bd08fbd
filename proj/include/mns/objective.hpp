#pragma once

#include <span>

#include "mns/matrix.hpp"
#include "mns/nn.hpp"
#include "mns/noise.hpp"

namespace mns {

/// Predicted similarities are clamped into [kSimilarityClamp, 1-kSimilarityClamp]
/// before the logarithm; one-hot posteriors would otherwise hit log(0).
inline constexpr double kSimilarityClamp = 1e-7;

/// f = T^T g: the noisy-class posterior implied by a clean posterior g.
Vector corrected_posterior(std::span<const double> g, const TransitionMatrix& t);

/// Inner product of two categorical distributions; the probability the two
/// examples carry the same (noisy) class.
double predicted_similarity(std::span<const double> f_a, std::span<const double> f_b);

struct PairLossOutput {
    double loss = 0.0;
    double s_hat = 0.0;  // unclamped predicted similarity
    Vector grad_logits_a;
    Vector grad_logits_b;
    bool clamped = false;
};

struct PairLossOptions {
    double pos_weight = 1.0;  // weight on the s=1 term; 1.0 is the faithful loss
};

/// Binary cross-entropy of g_a . g_b against the similarity label, with
/// gradients taken through the softmax back to each example's logits.
PairLossOutput mcl_loss(std::span<const double> g_a, std::span<const double> g_b, int s,
                        const PairLossOptions& opts = {});

/// Forward-corrected pair loss: both posteriors are mapped through T^T
/// before the inner product. With T = I this is bit-identical to mcl_loss.
PairLossOutput mns_loss(std::span<const double> g_a, std::span<const double> g_b,
                        const TransitionMatrix& t, int s, const PairLossOptions& opts = {});

struct BatchPairLoss {
    double mean_loss = 0.0;
    GradientBundle grads;  // parameter gradients of the mean loss; logit_grads filled in
};

/// Mean pair loss over a batch with a full backward pass to the parameters.
/// Uses mns_loss when `t` is given, mcl_loss otherwise. Pair indices refer
/// to rows of X.
BatchPairLoss batch_pair_loss(const MlpModel& model, const Matrix& X,
                              const SimilarityPairBatch& pairs, const TransitionMatrix* t,
                              const PairLossOptions& opts = {});

} // namespace mns
