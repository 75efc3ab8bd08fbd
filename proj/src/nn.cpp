#include "mns/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mns/rng.hpp"

namespace mns {

std::string activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation: " + name);
}

MlpModel::MlpModel(std::vector<Layer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
    if (layers_.empty()) throw std::invalid_argument("MlpModel: no layers");
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
        if (layers_[i].weight.rows() != layers_[i + 1].weight.cols())
            throw std::invalid_argument("MlpModel: layer " + std::to_string(i) +
                                        " output width does not feed layer " +
                                        std::to_string(i + 1));
    }
    for (const auto& l : layers_) {
        if (!all_finite(l.weight) || !all_finite(std::span<const double>(l.bias)))
            throw std::invalid_argument("MlpModel: non-finite parameter");
        if (l.has_bias() && l.bias.size() != l.weight.rows())
            throw std::invalid_argument("MlpModel: bias length != layer output width");
    }
}

MlpModel MlpModel::init(const std::vector<std::size_t>& widths, Activation activation,
                        bool with_bias, std::uint64_t seed) {
    if (widths.size() < 2) throw std::invalid_argument("MlpModel::init: need at least 2 widths");
    Rng rng(seed);
    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const std::size_t fan_in = widths[i], fan_out = widths[i + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Layer l;
        l.weight = Matrix(fan_out, fan_in);
        for (double& w : l.weight.data()) w = rng.uniform(-bound, bound);
        if (with_bias) l.bias.assign(fan_out, 0.0);
        layers.push_back(std::move(l));
    }
    return MlpModel(std::move(layers), activation);
}

namespace {

void apply_activation(Matrix& z, Activation a) {
    if (a == Activation::relu)
        for (double& x : z.data()) x = x > 0.0 ? x : 0.0;
}

Matrix affine(const Layer& l, const Matrix& x) {
    // x is n x in, weight is out x in; result n x out.
    Matrix y = matmul_transposed_b(x, l.weight);
    if (l.has_bias())
        for (std::size_t i = 0; i < y.rows(); ++i)
            for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += l.bias[j];
    return y;
}

} // namespace

Matrix MlpModel::forward_logits(const Matrix& X) const {
    if (X.cols() != input_dim())
        throw std::invalid_argument("forward_logits: input width " + std::to_string(X.cols()) +
                                    " != model input dim " + std::to_string(input_dim()));
    if (!all_finite(X)) throw std::invalid_argument("forward_logits: non-finite input");
    Matrix a = X;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        a = affine(layers_[i], a);
        if (i + 1 < layers_.size()) apply_activation(a, activation_);
    }
    return a;
}

bool MlpModel::operator==(const MlpModel& other) const {
    if (activation_ != other.activation_ || layers_.size() != other.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (!layers_[i].weight.same_shape(other.layers_[i].weight) ||
            layers_[i].weight.data() != other.layers_[i].weight.data() ||
            layers_[i].bias != other.layers_[i].bias)
            return false;
    }
    return true;
}

ForwardCache forward_cached(const MlpModel& model, const Matrix& X) {
    if (X.cols() != model.input_dim())
        throw std::invalid_argument("forward_cached: input width mismatch");
    if (!all_finite(X)) throw std::invalid_argument("forward_cached: non-finite input");
    ForwardCache cache;
    cache.activations.reserve(model.depth() + 1);
    cache.activations.push_back(X);
    for (std::size_t i = 0; i < model.depth(); ++i) {
        Matrix a = affine(model.layers()[i], cache.activations.back());
        if (i + 1 < model.depth()) apply_activation(a, model.activation());
        cache.activations.push_back(std::move(a));
    }
    return cache;
}

GradientBundle GradientBundle::zeros_like(const MlpModel& model) {
    GradientBundle g;
    for (const auto& l : model.layers()) {
        g.weight_grads.emplace_back(l.weight.rows(), l.weight.cols());
        g.bias_grads.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

bool GradientBundle::finite() const {
    for (const auto& m : weight_grads)
        if (!all_finite(m)) return false;
    for (const auto& b : bias_grads)
        if (!all_finite(std::span<const double>(b))) return false;
    return logit_grads.empty() || all_finite(logit_grads);
}

GradientBundle backward(const MlpModel& model, const ForwardCache& cache,
                        const Matrix& logit_grads) {
    const std::size_t d = model.depth();
    if (cache.activations.size() != d + 1)
        throw std::invalid_argument("backward: cache does not match model depth");
    if (!logit_grads.same_shape(cache.activations.back()))
        throw std::invalid_argument("backward: logit gradient shape mismatch");

    GradientBundle g = GradientBundle::zeros_like(model);
    Matrix delta = logit_grads;  // dLoss/d(pre-activation) of the current layer
    for (std::size_t li = d; li-- > 0;) {
        const Matrix& input = cache.activations[li];
        // weight grad: delta^T * input  (out x in)
        g.weight_grads[li] = matmul_transposed_a(delta, input);
        if (model.layers()[li].has_bias()) {
            Vector& bg = g.bias_grads[li];
            for (std::size_t i = 0; i < delta.rows(); ++i)
                for (std::size_t j = 0; j < delta.cols(); ++j) bg[j] += delta(i, j);
        }
        if (li == 0) break;
        // propagate: dLoss/d(activation of layer li-1) = delta * W_li
        Matrix prev = matmul(delta, model.layers()[li].weight);
        if (model.activation() == Activation::relu) {
            const Matrix& post = cache.activations[li];  // post-ReLU output of layer li-1
            for (std::size_t i = 0; i < prev.rows(); ++i)
                for (std::size_t j = 0; j < prev.cols(); ++j)
                    if (post(i, j) <= 0.0) prev(i, j) = 0.0;
        }
        delta = std::move(prev);
    }
    return g;
}

Vector softmax(std::span<const double> logits) {
    if (!all_finite(logits)) throw std::invalid_argument("softmax: non-finite logits");
    const double mx = *std::max_element(logits.begin(), logits.end());
    Vector out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        Vector p = softmax(logits.row(i));
        std::copy(p.begin(), p.end(), out.row(i).begin());
    }
    return out;
}

AdamState AdamState::init(const MlpModel& model, const AdamParams& params) {
    AdamState s;
    s.params = params;
    for (const auto& l : model.layers()) {
        s.m_weights.emplace_back(l.weight.rows(), l.weight.cols());
        s.v_weights.emplace_back(l.weight.rows(), l.weight.cols());
        s.m_biases.emplace_back(l.bias.size(), 0.0);
        s.v_biases.emplace_back(l.bias.size(), 0.0);
    }
    return s;
}

namespace {

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamParams& p, double bc1, double bc2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * grad[i];
        v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= p.learning_rate * mhat / (std::sqrt(vhat) + p.epsilon);
    }
}

} // namespace

void adam_step(MlpModel& model, const GradientBundle& grads, AdamState& state) {
    if (grads.weight_grads.size() != model.depth())
        throw std::invalid_argument("adam_step: gradient layer count mismatch");
    for (std::size_t i = 0; i < model.depth(); ++i) {
        if (!grads.weight_grads[i].same_shape(model.layers()[i].weight) ||
            grads.bias_grads[i].size() != model.layers()[i].bias.size())
            throw std::invalid_argument("adam_step: gradient shape mismatch at layer " +
                                        std::to_string(i));
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.params.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.params.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < model.depth(); ++i) {
        adam_update(model.layers()[i].weight.data(), grads.weight_grads[i].data(),
                    state.m_weights[i].data(), state.v_weights[i].data(), state.params, bc1, bc2);
        adam_update(model.layers()[i].bias, grads.bias_grads[i], state.m_biases[i],
                    state.v_biases[i], state.params, bc1, bc2);
    }
}

GradientBundle finite_diff_gradient(const std::function<double(const MlpModel&)>& loss_fn,
                                    const MlpModel& model, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be positive");
    GradientBundle g = GradientBundle::zeros_like(model);
    MlpModel probe = model;

    auto central = [&](double& slot, std::size_t layer, const char* kind, std::size_t idx) {
        const double w0 = slot;
        const double step = h * std::max(1.0, std::abs(w0));
        slot = w0 + step;
        const double lp = loss_fn(probe);
        slot = w0 - step;
        const double lm = loss_fn(probe);
        slot = w0;
        if (!std::isfinite(lp) || !std::isfinite(lm))
            throw std::runtime_error("finite_diff_gradient: non-finite loss probing layer " +
                                     std::to_string(layer) + " " + kind + "[" +
                                     std::to_string(idx) + "]");
        return (lp - lm) / (2.0 * step);
    };

    for (std::size_t li = 0; li < probe.depth(); ++li) {
        auto& layer = probe.layers()[li];
        for (std::size_t k = 0; k < layer.weight.data().size(); ++k)
            g.weight_grads[li].data()[k] = central(layer.weight.data()[k], li, "weight", k);
        for (std::size_t k = 0; k < layer.bias.size(); ++k)
            g.bias_grads[li][k] = central(layer.bias[k], li, "bias", k);
    }
    return g;
}

} // namespace mns
