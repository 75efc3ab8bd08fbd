#include "mns/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "mns/rng.hpp"

namespace mns {

TransitionMatrix TransitionMatrix::identity(std::size_t num_classes) {
    return TransitionMatrix(Matrix::identity(num_classes));
}

TransitionMatrix TransitionMatrix::from_matrix(Matrix m) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw std::invalid_argument("TransitionMatrix: must be square and non-empty");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("TransitionMatrix: entry out of [0,1] at row " +
                                            std::to_string(i));
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-10)
            throw std::invalid_argument("TransitionMatrix: row " + std::to_string(i) +
                                        " sums to " + std::to_string(sum));
    }
    return TransitionMatrix(std::move(m));
}

bool TransitionMatrix::is_identity() const {
    for (std::size_t i = 0; i < m_.rows(); ++i)
        for (std::size_t j = 0; j < m_.cols(); ++j)
            if (m_(i, j) != (i == j ? 1.0 : 0.0)) return false;
    return true;
}

TransitionMatrix symmetric_transition(std::size_t num_classes, double rho) {
    if (num_classes < 2)
        throw std::invalid_argument("symmetric_transition: need at least 2 classes");
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::invalid_argument("symmetric_transition: rho must lie in [0,1)");
    const double off = rho / static_cast<double>(num_classes - 1);
    Matrix m(num_classes, num_classes, off);
    for (std::size_t i = 0; i < num_classes; ++i) m(i, i) = 1.0 - rho;
    return TransitionMatrix::from_matrix(std::move(m));
}

void LabeledDataset::validate() const {
    if (labels.empty()) throw std::invalid_argument("LabeledDataset: empty");
    if (X.rows() != labels.size())
        throw std::invalid_argument("LabeledDataset: feature/label count mismatch");
    if (!all_finite(X)) throw std::invalid_argument("LabeledDataset: non-finite feature");
    for (int y : labels)
        if (y < 1 || static_cast<std::size_t>(y) > num_classes)
            throw std::invalid_argument("LabeledDataset: label " + std::to_string(y) +
                                        " outside 1.." + std::to_string(num_classes));
}

std::vector<int> corrupt_labels(const LabeledDataset& data, const TransitionMatrix& t,
                                std::uint64_t seed) {
    if (data.num_classes > t.num_classes())
        throw std::invalid_argument("corrupt_labels: dataset has more classes than T");
    for (int y : data.labels)
        if (y < 1 || static_cast<std::size_t>(y) > t.num_classes())
            throw std::invalid_argument("corrupt_labels: label out of range of T");

    Rng rng(seed);
    std::vector<int> noisy(data.labels.size());
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        const auto row = t.row(static_cast<std::size_t>(data.labels[i] - 1));
        const double u = rng.uniform01();
        double cum = 0.0;
        std::size_t j = 0;
        for (; j + 1 < row.size(); ++j) {
            cum += row[j];
            if (u < cum) break;
        }
        noisy[i] = static_cast<int>(j + 1);
    }
    return noisy;
}

double SimilarityPairBatch::positive_fraction() const {
    if (pairs.empty()) return 0.0;
    std::size_t pos = 0;
    for (const auto& p : pairs) pos += static_cast<std::size_t>(p.s);
    return static_cast<double>(pos) / static_cast<double>(pairs.size());
}

SimilarityPairBatch make_similarity_pairs(const std::vector<int>& noisy_labels,
                                          const PairingStrategy& strategy, std::uint64_t seed,
                                          bool retain_labels) {
    const std::size_t n = noisy_labels.size();
    if (n < 2) throw std::invalid_argument("make_similarity_pairs: need at least 2 examples");

    SimilarityPairBatch batch;
    auto emit = [&](std::size_t a, std::size_t b) {
        batch.pairs.push_back({a, b, noisy_labels[a] == noisy_labels[b] ? 1 : 0});
    };

    if (strategy.kind == PairingStrategy::Kind::all_pairs) {
        batch.pairs.reserve(n * (n - 1) / 2);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) emit(a, b);
    } else {
        const std::size_t total = n * (n - 1) / 2;
        const std::size_t k = strategy.sample_count;
        if (k > total)
            throw std::invalid_argument("make_similarity_pairs: sampled(" + std::to_string(k) +
                                        ") exceeds " + std::to_string(total) + " pairs");
        // Floyd's algorithm: k distinct linear pair indices, uniformly.
        Rng rng(seed);
        std::unordered_set<std::size_t> chosen;
        chosen.reserve(k * 2);
        std::vector<std::size_t> ordered;
        ordered.reserve(k);
        for (std::size_t t = total - k; t < total; ++t) {
            const auto r = static_cast<std::size_t>(rng.uniform_int(t + 1));
            if (chosen.insert(r).second)
                ordered.push_back(r);
            else {
                chosen.insert(t);
                ordered.push_back(t);
            }
        }
        for (std::size_t lin : ordered) {
            // invert lin = a*n - a*(a+1)/2 + (b-a-1)
            std::size_t a = 0, base = 0;
            while (base + (n - 1 - a) <= lin) {
                base += n - 1 - a;
                ++a;
            }
            const std::size_t b = a + 1 + (lin - base);
            emit(a, b);
        }
    }
    if (retain_labels) batch.diagnostic_labels = noisy_labels;
    return batch;
}

Matrix blob_means(std::size_t num_classes, std::size_t dim, double separation) {
    if (num_classes < 1) throw std::invalid_argument("blob_means: need at least one class");
    if (dim + 1 < num_classes)
        throw std::invalid_argument("blob_means: simplex placement needs dim >= C-1");
    // Regular simplex: e_1..e_C in R^C centered, expressed in the Helmert
    // basis of the sum-zero hyperplane; pairwise distance sqrt(2), then
    // rescaled to `separation`.
    const std::size_t C = num_classes;
    Matrix means(C, dim);
    const double scale = separation / std::sqrt(2.0);
    for (std::size_t i = 0; i < C; ++i) {
        for (std::size_t k = 1; k < C; ++k) {
            // Helmert row k of e_i - centroid; centroid component cancels in
            // the basis (rows are orthogonal to the all-ones vector).
            const double denom = std::sqrt(static_cast<double>(k) * (k + 1));
            double coord;
            if (i < k)
                coord = 1.0 / denom;
            else if (i == k)
                coord = -static_cast<double>(k) / denom;
            else
                coord = 0.0;
            means(i, k - 1) = scale * coord;
        }
    }
    return means;
}

LabeledDataset gaussian_blobs(const BlobsConfig& cfg) {
    if (cfg.num_classes < 1 || cfg.per_class < 1 || cfg.dim < 1)
        throw std::invalid_argument("gaussian_blobs: all sizes must be positive");
    if (!(cfg.separation > 0.0) || !(cfg.spread >= 0.0))
        throw std::invalid_argument("gaussian_blobs: separation must be positive, spread >= 0");
    const Matrix means = blob_means(cfg.num_classes, cfg.dim, cfg.separation);

    const std::size_t n = cfg.num_classes * cfg.per_class;
    LabeledDataset data;
    data.X = Matrix(n, cfg.dim);
    data.labels.resize(n);
    data.num_classes = cfg.num_classes;
    data.split = cfg.split;

    Rng rng(cfg.seed);
    std::size_t row = 0;
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
        for (std::size_t k = 0; k < cfg.per_class; ++k, ++row) {
            for (std::size_t j = 0; j < cfg.dim; ++j)
                data.X(row, j) = means(c, j) + cfg.spread * rng.normal();
            data.labels[row] = static_cast<int>(c + 1);
        }
    }
    data.validate();
    return data;
}

} // namespace mns
