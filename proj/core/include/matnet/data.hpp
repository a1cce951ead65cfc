#pragma once

#include <random>
#include <string>
#include <vector>

#include "matnet/graph.hpp"
#include "matnet/matrix.hpp"

namespace matnet {

// Thrown when an input file fails to parse; the message carries the detail
// (bad magic, truncated payload, count mismatch, line number...).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledMatrixSet {
  std::vector<Matrix> items;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return items.size(); }
};

struct SequenceSet {
  std::vector<std::vector<Matrix>> sequences;  // all of one length and frame shape
  // Prediction targets, when the task splits each sequence into a context the
  // model sees and a horizon it must produce.
  std::vector<std::vector<Matrix>> targets;
};

// IDX container ingestion (big-endian magic + dims). Images are scaled to
// [0, 1]; image/label counts must agree.
LabeledMatrixSet load_idx(const std::string& images_path, const std::string& labels_path);

// Zeroes `count` square patches of side `patch`, placed uniformly at random
// but always fully inside the image.
Matrix corrupt_patches(const Matrix& x, int patch, int count, std::mt19937_64& rng);

// Deterministic placement used by corrupt_patches and directly by tests.
Matrix apply_patch(const Matrix& x, int top, int left, int patch);

// Masking noise: each entry is independently zeroed with probability `ratio`.
Matrix add_noise(const Matrix& x, double ratio, std::mt19937_64& rng);

// Additive zero-mean Gaussian alternative, selectable from configs.
Matrix add_gaussian_noise(const Matrix& x, double stddev, std::mt19937_64& rng);

// Sequences of frames with `n_digits` base images bouncing off the frame
// edges under constant integer velocities; overlaps combine by max.
SequenceSet moving_digits(const LabeledMatrixSet& base, int n_sequences, int length,
                          int frame, int n_digits, std::mt19937_64& rng);

// Per channel: remove the temporal mean, slide a Hamming window of `window`
// samples with `overlap` shared samples between frames, take DFT magnitudes
// and keep bins 1..window/2 (bin 0 dropped). Output shape:
// channels x window/2 x frame count.
Tensor3 stft_spectrogram(const Matrix& signals, int window = 64, int overlap = 56);

// Graph ingestion: whitespace edge list, headerless CSV features, one label
// per line. Everything starts in the train split.
Graph load_graph(const std::string& edges_path, const std::string& features_path,
                 const std::string& labels_path);

// Seeded shuffle assignment of `n_val` + `n_test` nodes; the rest train.
void assign_splits(Graph& g, int n_val, int n_test, std::mt19937_64& rng);

// ---- synthetic desk-scale stand-ins ------------------------------------------

// Class-templated images: each class gets a fixed random blob pattern; samples
// are jittered shifts of the template plus masking noise.
LabeledMatrixSet synthetic_digits(int n_samples, int classes, int rows, int cols,
                                  std::mt19937_64& rng);

// Two-class 64x64-style frames reduced to `frame` size: one bright square per
// frame moving with a constant velocity; context frames plus horizon targets.
SequenceSet constant_motion_sequences(int n_sequences, int context, int horizon,
                                      int frame, std::mt19937_64& rng);

// Two-class multichannel signals whose classes differ by which frequency band
// carries energy on a channel subset; separable after the spectrogram.
struct EegSurrogate {
  std::vector<Matrix> trials;  // channels x samples
  std::vector<int> labels;
};
EegSurrogate synthetic_eeg(int n_trials, int channels, int samples, std::mt19937_64& rng);

// Community graph: within-class edge probability p_in, across p_out; features
// are noisy class prototypes.
Graph synthetic_community_graph(int nodes, int classes, int feature_dim, double p_in,
                                double p_out, std::mt19937_64& rng);

}  // namespace matnet
