#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mns/matrix.hpp"

namespace mns {

enum class Activation { relu, identity };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // empty when the layer has no bias term
    bool has_bias() const { return !bias.empty(); }
};

/// Dense feed-forward network with a softmax head. The hidden activation is
/// applied after every layer except the last; logits come straight out of
/// the final affine map.
class MlpModel {
public:
    MlpModel() = default;
    MlpModel(std::vector<Layer> layers, Activation activation);

    /// Seeded uniform init in +-sqrt(6/(fan_in+fan_out)); biases start at 0.
    /// `widths` = {input_dim, hidden..., num_classes}.
    static MlpModel init(const std::vector<std::size_t>& widths, Activation activation,
                         bool with_bias, std::uint64_t seed);

    std::size_t depth() const { return layers_.size(); }
    std::size_t input_dim() const { return layers_.front().weight.cols(); }
    std::size_t num_classes() const { return layers_.back().weight.rows(); }
    Activation activation() const { return activation_; }

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    /// h(X) for a batch: one logit row per input row. Pure; rejects inputs
    /// whose width differs from the first layer or that contain non-finite
    /// values.
    Matrix forward_logits(const Matrix& X) const;

    bool operator==(const MlpModel& other) const;

private:
    std::vector<Layer> layers_;
    Activation activation_ = Activation::relu;
};

/// Per-layer post-activation outputs kept for the backward pass.
/// activations[0] is the input batch; activations[depth] holds the logits.
struct ForwardCache {
    std::vector<Matrix> activations;
};

ForwardCache forward_cached(const MlpModel& model, const Matrix& X);

/// Parameter gradients mirroring the model plus (optionally) the logit
/// gradients they were propagated from.
struct GradientBundle {
    std::vector<Matrix> weight_grads;
    std::vector<Vector> bias_grads;
    Matrix logit_grads;  // n x C; empty unless the producer filled it in

    static GradientBundle zeros_like(const MlpModel& model);
    bool finite() const;
};

/// Reverse-mode pass from dLoss/dlogits to parameter gradients.
GradientBundle backward(const MlpModel& model, const ForwardCache& cache,
                        const Matrix& logit_grads);

/// Numerically stable softmax (max-shift). Rejects non-finite logits.
Vector softmax(std::span<const double> logits);

/// Row-wise softmax of a logit batch.
Matrix softmax_rows(const Matrix& logits);

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 0.001;
};

struct AdamState {
    std::vector<Matrix> m_weights, v_weights;
    std::vector<Vector> m_biases, v_biases;
    long step = 0;
    AdamParams params;

    static AdamState init(const MlpModel& model, const AdamParams& params);
};

/// One bias-corrected Adam update in place; bumps state.step by 1.
void adam_step(MlpModel& model, const GradientBundle& grads, AdamState& state);

/// Central differences over every parameter, step h*max(1,|w|) per
/// parameter. The loss probe must be pure. Throws std::runtime_error naming
/// the parameter if the loss comes back non-finite during probing.
GradientBundle finite_diff_gradient(const std::function<double(const MlpModel&)>& loss_fn,
                                    const MlpModel& model, double h);

} // namespace mns
