#pragma once

#include <map>
#include <string>
#include <vector>

#include "mns/nn.hpp"
#include "mns/noise.hpp"
#include "mns/pipeline.hpp"

namespace mns {

/// Shortest decimal string that parses back to the identical double;
/// every text format below round-trips losslessly through this.
std::string format_double(double v);
double parse_double(const std::string& s);

// Columnar text dataset: "n dim C" header, then one line per example with
// dim feature values followed by the label (1..C).
void write_dataset(const std::string& path, const LabeledDataset& data);
LabeledDataset read_dataset(const std::string& path);

// Transition matrix file: first line C, then C rows of C values.
void write_transition(const std::string& path, const TransitionMatrix& t);
TransitionMatrix read_transition(const std::string& path);

/// Heatmap-ready CSV: header "row,col,value", one line per entry.
void write_transition_csv(const std::string& path, const TransitionMatrix& t);

// Pair file: "num_pairs" header, then "i j s" per line (0-based indices).
void write_pairs(const std::string& path, const SimilarityPairBatch& pairs);
SimilarityPairBatch read_pairs(const std::string& path);

// Model checkpoint, self-describing text container (see docs/formats.md).
void write_checkpoint(const std::string& path, const MlpModel& model);
MlpModel read_checkpoint(const std::string& path);

/// JSON report; wall_clock_seconds is the only field that varies between
/// identically-seeded runs.
std::string report_to_json(const ExperimentReport& report);
void write_report_json(const std::string& path, const ExperimentReport& report);

/// Per-epoch curves as CSV: stage,epoch,train_loss,val_loss,val_pair_error,
/// val_pair_error_argmax,learning_rate.
void write_report_csv(const std::string& path, const ExperimentReport& report);

/// Flat key-value config file with INI-style [section] prefixes; '#'
/// comments. Returns "section.key" -> value.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Builds an ExperimentConfig from "section.key" entries (file values
/// overlaid with CLI overrides beforehand). Unknown keys are rejected.
ExperimentConfig experiment_config_from_map(const std::map<std::string, std::string>& kv);

} // namespace mns
