#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mns/matrix.hpp"

namespace mns {

/// Row-stochastic C x C matrix; entry (i,j) is the probability that clean
/// class i+1 is observed as noisy class j+1. Construction validates the
/// invariants (entries in [0,1], rows sum to 1 within 1e-10).
class TransitionMatrix {
public:
    static TransitionMatrix identity(std::size_t num_classes);

    /// Validates and wraps an arbitrary row-stochastic matrix.
    static TransitionMatrix from_matrix(Matrix m);

    std::size_t num_classes() const { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    std::span<const double> row(std::size_t i) const { return m_.row(i); }
    const Matrix& matrix() const { return m_; }

    bool is_identity() const;

private:
    explicit TransitionMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

/// Noise-rho matrix: 1-rho on the diagonal, rho/(C-1) elsewhere.
TransitionMatrix symmetric_transition(std::size_t num_classes, double rho);

enum class Split { train, validation, test };

/// Feature matrix with class labels in 1..C.
struct LabeledDataset {
    Matrix X;                 // n x dim
    std::vector<int> labels;  // values in 1..C
    std::size_t num_classes = 0;
    Split split = Split::train;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return X.cols(); }
    void validate() const;
};

/// Draws a noisy label for each example from row Y_i of T. Deterministic
/// given the seed.
std::vector<int> corrupt_labels(const LabeledDataset& data, const TransitionMatrix& t,
                                std::uint64_t seed);

struct SimilarityPair {
    std::size_t a = 0, b = 0;  // a < b
    int s = 0;                 // noisy similarity label, 0 or 1
};

/// Indexed pairs with noisy similarity labels. The class labels used to
/// build the pairs may be retained for diagnostics but take no part in
/// training.
struct SimilarityPairBatch {
    std::vector<SimilarityPair> pairs;
    std::vector<int> diagnostic_labels;  // empty unless explicitly retained

    std::size_t size() const { return pairs.size(); }
    double positive_fraction() const;
};

struct PairingStrategy {
    enum class Kind { all_pairs, sampled } kind = Kind::all_pairs;
    std::size_t sample_count = 0;

    static PairingStrategy all_pairs() { return {}; }
    static PairingStrategy sampled(std::size_t k) { return {Kind::sampled, k}; }
};

/// Unordered deduplicated pairs (a < b) with s = 1 iff the two noisy labels
/// agree. all_pairs emits every n*(n-1)/2 pair; sampled(k) draws k distinct
/// pairs uniformly.
SimilarityPairBatch make_similarity_pairs(const std::vector<int>& noisy_labels,
                                          const PairingStrategy& strategy, std::uint64_t seed,
                                          bool retain_labels = false);

struct BlobsConfig {
    std::size_t num_classes = 3;
    std::size_t per_class = 1000;
    std::size_t dim = 8;
    double separation = 4.0;  // pairwise distance between class means
    double spread = 1.0;      // per-coordinate standard deviation
    std::uint64_t seed = 0;
    Split split = Split::train;
};

/// Isotropic Gaussian clusters around the vertices of a regular simplex
/// scaled so every pair of means sits `separation` apart. Needs
/// dim >= C-1.
LabeledDataset gaussian_blobs(const BlobsConfig& cfg);

/// The class means the generator uses, one row per class.
Matrix blob_means(std::size_t num_classes, std::size_t dim, double separation);

} // namespace mns
