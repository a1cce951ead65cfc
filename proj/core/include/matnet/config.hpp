#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace matnet {

// Thrown on malformed or invalid configuration; the message names the
// offending section/key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Declarative description of one experiment: model shape, optimizer, data
// source and stopping rule. Parsed from a flat sectioned key-value file;
// unknown sections or keys are rejected. Seeds are mandatory; there is no
// wall-clock default.
struct ExperimentConfig {
  std::string experiment;  // ffn-classify | autoencoder | seq2seq |
                           // spectrogram-classify | graph-nodes | param-count
  std::uint64_t seed = 0;

  struct Model {
    int depth = 2;
    int hidden_rows = 20;
    int hidden_cols = 20;
    std::string activation = "relu";
    std::string skip = "none";  // none | highway | resnet
    bool batch_norm = false;
    double dropout_input = 0.0;
    double dropout_hidden = 0.0;
    std::string cell = "lstm";  // rnn | lstm | gru
    std::string output_activation = "sigmoid";
    int attention_heads = 0;  // graph-nodes: 0 = mean aggregation
    int column_height = 5;
    int hidden_dim = 20;
    int neighbor_samples = 50;
    std::string frontend = "none";  // spectrogram-classify: none | tensor-map
    int frontend_bands = 4;
    int frontend_rows = 20;
    int frontend_cols = 20;
    int in_rows = 28;  // param-count dims
    int in_cols = 28;
    int out_rows = 50;
    int out_cols = 50;
    bool operator==(const Model&) const = default;
  } model;

  struct Optimizer {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 32;
    double l1 = 0.0;
    double l2 = 0.0;
    std::string loss = "mse";  // seq2seq: mse | bce
    bool operator==(const Optimizer&) const = default;
  } optimizer;

  struct Data {
    std::string source = "synthetic";
    std::string images;       // idx paths
    std::string labels;
    std::string edges;        // graph paths
    std::string features;
    std::string node_labels;
    int samples = 512;
    int classes = 10;
    int rows = 28;
    int cols = 28;
    int sequences = 32;
    int context = 15;
    int horizon = 5;
    int frame = 16;
    int digits = 2;
    int trials = 200;
    int channels = 64;
    int signal_samples = 256;
    int nodes = 150;
    int feature_dim = 16;
    double p_in = 0.10;
    double p_out = 0.01;
    double val_fraction = 0.2;
    double test_fraction = 0.2;
    std::string noise = "masking";  // masking | gaussian | none
    double noise_ratio = 0.2;
    bool operator==(const Data&) const = default;
  } data;

  struct Stopping {
    int epochs = 30;
    int patience = 10;
    bool operator==(const Stopping&) const = default;
  } stopping;

  struct Run {
    // Wall-clock timing makes metrics files non-reproducible, so it is a
    // deliberate opt-in; with it off every wall_ms is written as 0.
    bool timing = false;
    bool operator==(const Run&) const = default;
  } run;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical text form: emits every field, so parse(serialize(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace matnet
