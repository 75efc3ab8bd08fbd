#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mns/estimation.hpp"
#include "mns/matrix.hpp"
#include "mns/noise.hpp"
#include "mns/training.hpp"

namespace mns {

enum class Method { mcl, mns_estimated_t, mns_true_t };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct DatasetSpec {
    enum class Kind { blobs, file } kind = Kind::blobs;
    // blobs generator; the test split reuses these shapes with its own seed
    BlobsConfig blobs;
    std::size_t test_per_class = 500;
    // file datasets carry clean labels; corruption happens inside the run
    std::string train_file;
    std::string test_file;
};

struct ExperimentConfig {
    DatasetSpec data;
    double rho = 0.3;
    TrainConfig train;
    AnchorConfig anchors;
    Method method = Method::mns_estimated_t;
    std::uint64_t seed = 0;
    double validation_fraction = 0.1;
    std::size_t val_pairs_cap = 100000;  // sampled pairing above this many val pairs
    bool warm_start = false;             // stage 2 reuses stage-1 weights
    std::optional<Matrix> t_hat_override;  // diagnostic: skip stage 1, force T_hat

    void validate() const;
};

struct ExperimentReport {
    int schema_version = 1;
    Method method = Method::mns_estimated_t;
    std::uint64_t seed = 0;
    double rho = 0.0;
    std::vector<EpochRecord> stage1_curves;
    std::vector<EpochRecord> stage2_curves;
    std::size_t stage1_selected_epoch = 0;  // 0 when stage 1 did not run
    std::size_t stage2_selected_epoch = 0;
    double test_accuracy = 0.0;
    Matrix confusion;            // C x C, rows = true class
    double epsilon = -1.0;       // estimation error; negative when unknown
    std::optional<Matrix> t_hat;
    std::optional<Matrix> t_true;
    std::vector<std::string> warnings;
    double wall_clock_seconds = 0.0;
    std::vector<std::pair<std::string, std::string>> config_echo;
};

struct ExperimentOutcome {
    ExperimentReport report;
    MlpModel model;  // stage-2 classifier (softmax head, no transition layer)
};

/// The two-stage algorithm end to end: (1) fit the noisy posterior and
/// estimate T_hat from anchors (skipped for mcl and mns_true_t), (2) fit the
/// classifier under the fixed transition layer, select the epoch with the
/// lowest noisy-validation pair error, and score argmax g on the clean test
/// split. Throws std::runtime_error tagged with the failing stage.
ExperimentOutcome run_algorithm1(const ExperimentConfig& cfg);

struct Evaluation {
    double accuracy = 0.0;
    Matrix confusion;  // rows = true class, cols = predicted
};

/// argmax_i g_i(x) against clean labels.
Evaluation evaluate_classifier(const MlpModel& model, const LabeledDataset& test);

struct BoundInputs {
    double input_norm_bound = 0.0;      // B
    std::size_t num_classes = 0;        // C
    std::size_t depth = 0;              // d
    std::vector<double> frobenius_bounds;  // M_1..M_d
    double loss_bound = 0.0;            // M
    double delta = 0.0;
    std::size_t sample_size = 0;        // n, in pairs

    void validate() const;
};

/// 2BC(sqrt(2 d ln 2)+1) prod(M_i) / sqrt(n) + M sqrt(ln(1/delta) / (2n)).
double generalization_bound(const BoundInputs& inputs);

/// Per-layer Frobenius norms of the weight matrices (biases excluded).
std::vector<double> frobenius_norms(const MlpModel& model);

/// Largest Euclidean row norm of a feature matrix; the B that the bound
/// needs for a concrete dataset.
double max_input_norm(const Matrix& x);

} // namespace mns
