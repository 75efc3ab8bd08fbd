#include "mns/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace mns {

namespace {

void check_simplex(std::span<const double> g, const char* who) {
    double sum = 0.0;
    for (double x : g) {
        if (!(x >= 0.0 && x <= 1.0))
            throw std::invalid_argument(std::string(who) + ": entry outside [0,1]");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-8)
        throw std::invalid_argument(std::string(who) + ": probabilities sum to " +
                                    std::to_string(sum));
}

void check_similarity_label(int s) {
    if (s != 0 && s != 1)
        throw std::invalid_argument("similarity label must be 0 or 1");
}

struct BceAtSimilarity {
    double loss;
    double dloss_dshat;  // zero when the clamp is active
    bool clamped;
};

BceAtSimilarity bce(double s_hat, int s, const PairLossOptions& opts) {
    const double lo = kSimilarityClamp, hi = 1.0 - kSimilarityClamp;
    const bool clamped = s_hat < lo || s_hat > hi;
    const double sc = clamped ? (s_hat < lo ? lo : hi) : s_hat;
    const double w = s == 1 ? opts.pos_weight : 1.0;
    const double loss = s == 1 ? -w * std::log(sc) : -std::log(1.0 - sc);
    const double grad = clamped ? 0.0 : (s == 1 ? -w / sc : 1.0 / (1.0 - sc));
    return {loss, grad, clamped};
}

/// dLoss/dlogits given the softmax output g and dLoss/dg.
Vector softmax_pullback(std::span<const double> g, std::span<const double> dg) {
    const double inner = dot(g, dg);
    Vector dh(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) dh[i] = g[i] * (dg[i] - inner);
    return dh;
}

Vector scaled(std::span<const double> v, double c) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = c * v[i];
    return out;
}

/// dg = T df (pullback of f = T^T g).
Vector transition_pullback(const TransitionMatrix& t, std::span<const double> df) {
    Vector dg(t.num_classes(), 0.0);
    for (std::size_t j = 0; j < t.num_classes(); ++j) {
        const auto row = t.row(j);
        double s = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) s += row[k] * df[k];
        dg[j] = s;
    }
    return dg;
}

} // namespace

Vector corrected_posterior(std::span<const double> g, const TransitionMatrix& t) {
    if (g.size() != t.num_classes())
        throw std::invalid_argument("corrected_posterior: dimension mismatch");
    check_simplex(g, "corrected_posterior");
    Vector f(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double gk = g[k];
        const auto row = t.row(k);
        for (std::size_t j = 0; j < f.size(); ++j) f[j] += row[j] * gk;
    }
    return f;
}

double predicted_similarity(std::span<const double> f_a, std::span<const double> f_b) {
    check_simplex(f_a, "predicted_similarity");
    check_simplex(f_b, "predicted_similarity");
    return dot(f_a, f_b);
}

PairLossOutput mcl_loss(std::span<const double> g_a, std::span<const double> g_b, int s,
                        const PairLossOptions& opts) {
    check_simplex(g_a, "mcl_loss");
    check_simplex(g_b, "mcl_loss");
    check_similarity_label(s);
    if (g_a.size() != g_b.size()) throw std::invalid_argument("mcl_loss: dimension mismatch");

    PairLossOutput out;
    out.s_hat = dot(g_a, g_b);
    const auto [loss, dldshat, clamped] = bce(out.s_hat, s, opts);
    out.loss = loss;
    out.clamped = clamped;
    out.grad_logits_a = softmax_pullback(g_a, scaled(g_b, dldshat));
    out.grad_logits_b = softmax_pullback(g_b, scaled(g_a, dldshat));
    return out;
}

PairLossOutput mns_loss(std::span<const double> g_a, std::span<const double> g_b,
                        const TransitionMatrix& t, int s, const PairLossOptions& opts) {
    check_simplex(g_a, "mns_loss");
    check_simplex(g_b, "mns_loss");
    check_similarity_label(s);
    if (g_a.size() != g_b.size() || g_a.size() != t.num_classes())
        throw std::invalid_argument("mns_loss: dimension mismatch");

    const Vector f_a = corrected_posterior(g_a, t);
    const Vector f_b = corrected_posterior(g_b, t);

    PairLossOutput out;
    out.s_hat = dot(f_a, f_b);
    const auto [loss, dldshat, clamped] = bce(out.s_hat, s, opts);
    out.loss = loss;
    out.clamped = clamped;
    out.grad_logits_a = softmax_pullback(g_a, transition_pullback(t, scaled(f_b, dldshat)));
    out.grad_logits_b = softmax_pullback(g_b, transition_pullback(t, scaled(f_a, dldshat)));
    return out;
}

BatchPairLoss batch_pair_loss(const MlpModel& model, const Matrix& X,
                              const SimilarityPairBatch& pairs, const TransitionMatrix* t,
                              const PairLossOptions& opts) {
    if (pairs.pairs.empty()) throw std::invalid_argument("batch_pair_loss: empty pair list");
    for (const auto& p : pairs.pairs) {
        if (p.a >= X.rows() || p.b >= X.rows())
            throw std::invalid_argument("batch_pair_loss: pair index outside batch");
        if (p.s != 0 && p.s != 1)
            throw std::invalid_argument("batch_pair_loss: similarity label must be 0 or 1");
    }
    if (t && t->num_classes() != model.num_classes())
        throw std::invalid_argument("batch_pair_loss: T size does not match model classes");

    const ForwardCache cache = forward_cached(model, X);
    const Matrix& logits = cache.activations.back();
    const Matrix g = softmax_rows(logits);
    const Matrix f = t ? matmul(g, t->matrix()) : g;  // row i holds T^T g_i

    const std::size_t n = X.rows(), c = model.num_classes();
    const double inv_pairs = 1.0 / static_cast<double>(pairs.pairs.size());

    double loss_sum = 0.0;
    Matrix df(n, c);
    for (const auto& p : pairs.pairs) {
        const auto fa = f.row(p.a), fb = f.row(p.b);
        const double s_hat = dot(fa, fb);
        const auto [loss, dldshat, clamped] = bce(s_hat, p.s, opts);
        loss_sum += loss;
        const double scale = dldshat * inv_pairs;
        if (scale != 0.0) {
            auto dfa = df.row(p.a);
            auto dfb = df.row(p.b);
            for (std::size_t j = 0; j < c; ++j) {
                dfa[j] += scale * fb[j];
                dfb[j] += scale * fa[j];
            }
        }
    }

    const Matrix dg = t ? matmul_transposed_b(df, t->matrix()) : df;

    Matrix logit_grads(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector dh = softmax_pullback(g.row(i), dg.row(i));
        std::copy(dh.begin(), dh.end(), logit_grads.row(i).begin());
    }

    BatchPairLoss out;
    out.mean_loss = loss_sum * inv_pairs;
    out.grads = backward(model, cache, logit_grads);
    out.grads.logit_grads = std::move(logit_grads);
    return out;
}

} // namespace mns
