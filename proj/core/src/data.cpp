#include "matnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>

namespace matnet {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw ParseError("idx: truncated file while reading " + what);
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

}  // namespace

LabeledMatrixSet load_idx(const std::string& images_path, const std::string& labels_path) {
  constexpr std::uint32_t kImageMagic = 0x00000803;
  constexpr std::uint32_t kLabelMagic = 0x00000801;

  std::ifstream img = open_binary(images_path);
  const std::uint32_t img_magic = read_be32(img, "image magic");
  if (img_magic != kImageMagic) {
    std::ostringstream msg;
    msg << "idx: bad image magic 0x" << std::hex << img_magic;
    throw ParseError(msg.str());
  }
  const std::uint32_t n_images = read_be32(img, "image count");
  const std::uint32_t rows = read_be32(img, "row count");
  const std::uint32_t cols = read_be32(img, "column count");

  std::ifstream lab = open_binary(labels_path);
  const std::uint32_t lab_magic = read_be32(lab, "label magic");
  if (lab_magic != kLabelMagic) {
    std::ostringstream msg;
    msg << "idx: bad label magic 0x" << std::hex << lab_magic;
    throw ParseError(msg.str());
  }
  const std::uint32_t n_labels = read_be32(lab, "label count");
  if (n_images != n_labels) {
    throw ParseError("idx: image count " + std::to_string(n_images) +
                     " != label count " + std::to_string(n_labels));
  }

  LabeledMatrixSet set;
  set.items.reserve(n_images);
  set.labels.reserve(n_images);
  std::vector<unsigned char> pixels(static_cast<std::size_t>(rows) * cols);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixels.data()), pixels.size())) {
      throw ParseError("idx: truncated image payload at item " + std::to_string(i));
    }
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t k = 0; k < pixels.size(); ++k) {
      m.raw()[k] = static_cast<double>(pixels[k]) / 255.0;
    }
    set.items.push_back(std::move(m));
    int label = lab.get();
    if (label == EOF) {
      throw ParseError("idx: truncated label payload at item " + std::to_string(i));
    }
    set.labels.push_back(label);
  }
  set.class_count = set.labels.empty()
                        ? 0
                        : *std::max_element(set.labels.begin(), set.labels.end()) + 1;
  return set;
}

Matrix apply_patch(const Matrix& x, int top, int left, int patch) {
  if (patch > x.rows() || patch > x.cols()) {
    throw ValueError("patch " + std::to_string(patch) + " larger than image " +
                     x.shape_str());
  }
  if (top < 0 || left < 0 || top + patch > x.rows() || left + patch > x.cols()) {
    throw ValueError("patch placement exits the image");
  }
  Matrix out = x;
  for (int r = top; r < top + patch; ++r)
    for (int c = left; c < left + patch; ++c) out(r, c) = 0.0;
  return out;
}

Matrix corrupt_patches(const Matrix& x, int patch, int count, std::mt19937_64& rng) {
  if (patch > x.rows() || patch > x.cols()) {
    throw ValueError("corrupt_patches: patch " + std::to_string(patch) +
                     " larger than image " + x.shape_str());
  }
  Matrix out = x;
  std::uniform_int_distribution<int> row_pick(0, x.rows() - patch);
  std::uniform_int_distribution<int> col_pick(0, x.cols() - patch);
  for (int k = 0; k < count; ++k) {
    const int top = row_pick(rng);
    const int left = col_pick(rng);
    for (int r = top; r < top + patch; ++r)
      for (int c = left; c < left + patch; ++c) out(r, c) = 0.0;
  }
  return out;
}

Matrix add_noise(const Matrix& x, double ratio, std::mt19937_64& rng) {
  if (ratio < 0.0 || ratio > 1.0) {
    throw ValueError("add_noise: ratio must be in [0, 1], got " + std::to_string(ratio));
  }
  if (ratio == 0.0) return x;
  Matrix out = x;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& v : out.raw()) {
    if (unit(rng) < ratio) v = 0.0;
  }
  return out;
}

Matrix add_gaussian_noise(const Matrix& x, double stddev, std::mt19937_64& rng) {
  if (stddev < 0.0) throw ValueError("add_gaussian_noise: stddev must be >= 0");
  Matrix out = x;
  std::normal_distribution<double> noise(0.0, stddev);
  for (double& v : out.raw()) v += noise(rng);
  return out;
}

SequenceSet moving_digits(const LabeledMatrixSet& base, int n_sequences, int length,
                          int frame, int n_digits, std::mt19937_64& rng) {
  if (base.items.empty()) throw ValueError("moving_digits: empty base set");
  const int digit_rows = base.items[0].rows();
  const int digit_cols = base.items[0].cols();
  if (frame < digit_rows || frame < digit_cols) {
    throw ValueError("moving_digits: frame " + std::to_string(frame) +
                     " smaller than digits " + base.items[0].shape_str());
  }
  std::uniform_int_distribution<int> digit_pick(0, static_cast<int>(base.items.size()) - 1);
  std::uniform_int_distribution<int> row_pick(0, frame - digit_rows);
  std::uniform_int_distribution<int> col_pick(0, frame - digit_cols);
  std::uniform_int_distribution<int> vel_pick(-3, 3);

  SequenceSet out;
  out.sequences.reserve(n_sequences);
  for (int s = 0; s < n_sequences; ++s) {
    struct Sprite {
      const Matrix* image;
      int r, c, vr, vc;
    };
    std::vector<Sprite> sprites;
    sprites.reserve(n_digits);
    for (int d = 0; d < n_digits; ++d) {
      Sprite sp;
      sp.image = &base.items[digit_pick(rng)];
      sp.r = row_pick(rng);
      sp.c = col_pick(rng);
      do {
        sp.vr = vel_pick(rng);
        sp.vc = vel_pick(rng);
      } while (sp.vr == 0 && sp.vc == 0);
      sprites.push_back(sp);
    }
    std::vector<Matrix> frames;
    frames.reserve(length);
    for (int tstep = 0; tstep < length; ++tstep) {
      Matrix f(frame, frame);
      for (Sprite& sp : sprites) {
        for (int r = 0; r < digit_rows; ++r)
          for (int c = 0; c < digit_cols; ++c) {
            double& px = f(sp.r + r, sp.c + c);
            px = std::max(px, (*sp.image)(r, c));
          }
        // advance with reflection off each edge
        int nr = sp.r + sp.vr;
        if (nr < 0 || nr > frame - digit_rows) {
          sp.vr = -sp.vr;
          nr = sp.r + sp.vr;
        }
        int nc = sp.c + sp.vc;
        if (nc < 0 || nc > frame - digit_cols) {
          sp.vc = -sp.vc;
          nc = sp.c + sp.vc;
        }
        sp.r = std::clamp(nr, 0, frame - digit_rows);
        sp.c = std::clamp(nc, 0, frame - digit_cols);
      }
      frames.push_back(std::move(f));
    }
    out.sequences.push_back(std::move(frames));
  }
  return out;
}

Tensor3 stft_spectrogram(const Matrix& signals, int window, int overlap) {
  const int channels = signals.rows();
  const int samples = signals.cols();
  if (samples < window) {
    throw ValueError("stft: " + std::to_string(samples) + " samples < window " +
                     std::to_string(window));
  }
  if (overlap < 0 || overlap >= window) {
    throw ValueError("stft: overlap must be in [0, window)");
  }
  const int hop = window - overlap;
  const int frames = (samples - window) / hop + 1;
  const int bins = window / 2;  // bins 1..window/2, bin 0 dropped

  std::vector<double> hamming(window);
  for (int n = 0; n < window; ++n) {
    hamming[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (window - 1));
  }

  Tensor3 out(channels, bins, frames);
  std::vector<double> windowed(window);
  for (int ch = 0; ch < channels; ++ch) {
    double mean = 0.0;
    for (int s = 0; s < samples; ++s) mean += signals(ch, s);
    mean /= static_cast<double>(samples);

    for (int f = 0; f < frames; ++f) {
      const int start = f * hop;
      for (int n = 0; n < window; ++n) {
        windowed[n] = (signals(ch, start + n) - mean) * hamming[n];
      }
      for (int k = 1; k <= bins; ++k) {
        double re = 0.0, im = 0.0;
        for (int n = 0; n < window; ++n) {
          const double phase = 2.0 * std::numbers::pi * k * n / window;
          re += windowed[n] * std::cos(phase);
          im -= windowed[n] * std::sin(phase);
        }
        out(ch, k - 1, f) = std::sqrt(re * re + im * im);
      }
    }
  }
  return out;
}

Graph load_graph(const std::string& edges_path, const std::string& features_path,
                 const std::string& labels_path) {
  std::ifstream ef(edges_path);
  if (!ef) throw ParseError("cannot open '" + edges_path + "'");
  std::vector<std::pair<int, int>> edges;
  int max_node = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(ef, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    int u, v;
    if (!(ss >> u >> v)) {
      throw ParseError(edges_path + ":" + std::to_string(line_no) +
                       ": expected two integers");
    }
    edges.emplace_back(u, v);
    max_node = std::max({max_node, u, v});
  }

  std::ifstream ff(features_path);
  if (!ff) throw ParseError("cannot open '" + features_path + "'");
  std::vector<std::vector<double>> feat_rows;
  line_no = 0;
  while (std::getline(ff, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(features_path + ":" + std::to_string(line_no) +
                         ": bad number '" + cell + "'");
      }
    }
    if (!feat_rows.empty() && row.size() != feat_rows[0].size()) {
      throw ParseError(features_path + ":" + std::to_string(line_no) +
                       ": ragged row width");
    }
    feat_rows.push_back(std::move(row));
  }
  if (feat_rows.empty()) throw ParseError(features_path + ": no feature rows");

  const int node_count = static_cast<int>(feat_rows.size());
  if (max_node >= node_count) {
    throw ParseError("graph: edge references node " + std::to_string(max_node) +
                     " but features cover " + std::to_string(node_count) + " rows");
  }

  std::ifstream lf(labels_path);
  if (!lf) throw ParseError("cannot open '" + labels_path + "'");
  std::vector<int> labels;
  line_no = 0;
  while (std::getline(lf, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw ParseError(labels_path + ":" + std::to_string(line_no) + ": bad label '" +
                       line + "'");
    }
  }
  if (static_cast<int>(labels.size()) != node_count) {
    throw ParseError("graph: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(node_count) + " feature rows");
  }

  Graph g = make_graph(node_count, edges);
  g.features = Matrix(node_count, static_cast<int>(feat_rows[0].size()));
  for (int i = 0; i < node_count; ++i)
    for (std::size_t j = 0; j < feat_rows[i].size(); ++j)
      g.features(i, static_cast<int>(j)) = feat_rows[i][j];
  g.labels = std::move(labels);
  g.split.assign(node_count, Split::train);
  return g;
}

void assign_splits(Graph& g, int n_val, int n_test, std::mt19937_64& rng) {
  if (n_val + n_test > g.node_count) {
    throw ValueError("assign_splits: val + test exceeds node count");
  }
  std::vector<int> order(g.node_count);
  for (int i = 0; i < g.node_count; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  g.split.assign(g.node_count, Split::train);
  int k = 0;
  for (int i = 0; i < n_test; ++i) g.split[order[k++]] = Split::test;
  for (int i = 0; i < n_val; ++i) g.split[order[k++]] = Split::val;
}

LabeledMatrixSet synthetic_digits(int n_samples, int classes, int rows, int cols,
                                  std::mt19937_64& rng) {
  // Each class: a template of a few bright axis-aligned bars on a dim field.
  std::vector<Matrix> templates;
  templates.reserve(classes);
  std::uniform_int_distribution<int> bar_count(2, 4);
  std::uniform_real_distribution<double> level(0.55, 1.0);
  for (int c = 0; c < classes; ++c) {
    Matrix t(rows, cols);
    const int bars = bar_count(rng);
    for (int b = 0; b < bars; ++b) {
      std::uniform_int_distribution<int> pos_r(0, rows - 1);
      std::uniform_int_distribution<int> pos_c(0, cols - 1);
      std::uniform_int_distribution<int> horizontal(0, 1);
      const double value = level(rng);
      if (horizontal(rng)) {
        const int r = pos_r(rng);
        for (int j = 0; j < cols; ++j) t(r, j) = std::max(t(r, j), value);
        if (r + 1 < rows)
          for (int j = 0; j < cols; ++j) t(r + 1, j) = std::max(t(r + 1, j), value);
      } else {
        const int c0 = pos_c(rng);
        for (int i = 0; i < rows; ++i) t(i, c0) = std::max(t(i, c0), value);
        if (c0 + 1 < cols)
          for (int i = 0; i < rows; ++i) t(i, c0 + 1) = std::max(t(i, c0 + 1), value);
      }
    }
    templates.push_back(std::move(t));
  }

  LabeledMatrixSet set;
  set.class_count = classes;
  set.items.reserve(n_samples);
  set.labels.reserve(n_samples);
  std::uniform_int_distribution<int> class_pick(0, classes - 1);
  std::uniform_int_distribution<int> shift(-2, 2);
  std::uniform_real_distribution<double> amp(0.8, 1.2);
  for (int s = 0; s < n_samples; ++s) {
    const int c = class_pick(rng);
    const int dr = shift(rng), dc = shift(rng);
    const double a = amp(rng);
    Matrix x(rows, cols);
    const Matrix& t = templates[c];
    for (int i = 0; i < rows; ++i) {
      const int si = i - dr;
      if (si < 0 || si >= rows) continue;
      for (int j = 0; j < cols; ++j) {
        const int sj = j - dc;
        if (sj < 0 || sj >= cols) continue;
        x(i, j) = std::min(1.0, a * t(si, sj));
      }
    }
    x = add_noise(x, 0.05, rng);
    set.items.push_back(std::move(x));
    set.labels.push_back(c);
  }
  return set;
}

SequenceSet constant_motion_sequences(int n_sequences, int context, int horizon,
                                      int frame, std::mt19937_64& rng) {
  const int block = std::max(2, frame / 4);
  std::uniform_int_distribution<int> pos(0, frame - block);
  std::uniform_int_distribution<int> vel(-2, 2);
  SequenceSet out;
  out.sequences.reserve(n_sequences);
  out.targets.reserve(n_sequences);
  for (int s = 0; s < n_sequences; ++s) {
    int r = pos(rng), c = pos(rng);
    int vr = 0, vc = 0;
    while (vr == 0 && vc == 0) {
      vr = vel(rng);
      vc = vel(rng);
    }
    std::vector<Matrix> all;
    all.reserve(context + horizon);
    for (int t = 0; t < context + horizon; ++t) {
      Matrix f(frame, frame);
      for (int i = 0; i < block; ++i)
        for (int j = 0; j < block; ++j) f(r + i, c + j) = 1.0;
      all.push_back(std::move(f));
      int nr = r + vr;
      if (nr < 0 || nr > frame - block) {
        vr = -vr;
        nr = r + vr;
      }
      int nc = c + vc;
      if (nc < 0 || nc > frame - block) {
        vc = -vc;
        nc = c + vc;
      }
      r = std::clamp(nr, 0, frame - block);
      c = std::clamp(nc, 0, frame - block);
    }
    out.sequences.emplace_back(all.begin(), all.begin() + context);
    out.targets.emplace_back(all.begin() + context, all.end());
  }
  return out;
}

EegSurrogate synthetic_eeg(int n_trials, int channels, int samples, std::mt19937_64& rng) {
  EegSurrogate out;
  out.trials.reserve(n_trials);
  out.labels.reserve(n_trials);
  std::uniform_int_distribution<int> label_pick(0, 1);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> background(0.0, 0.3);
  // class 0 -> energy near bin 5 of the window, class 1 -> near bin 12,
  // expressed on every fourth channel so the signature spans the montage
  for (int s = 0; s < n_trials; ++s) {
    const int label = label_pick(rng);
    const double cycles_per_window = label == 0 ? 5.0 : 12.0;
    const double freq = cycles_per_window / 64.0;  // cycles per sample
    Matrix trial(channels, samples);
    for (int ch = 0; ch < channels; ++ch) {
      const double ph = phase(rng);
      const bool carries = (ch % 4) == 0;
      for (int t = 0; t < samples; ++t) {
        double v = background(rng);
        if (carries) v += 1.5 * std::cos(2.0 * std::numbers::pi * freq * t + ph);
        trial(ch, t) = v;
      }
    }
    out.trials.push_back(std::move(trial));
    out.labels.push_back(label);
  }
  return out;
}

Graph synthetic_community_graph(int nodes, int classes, int feature_dim, double p_in,
                                double p_out, std::mt19937_64& rng) {
  std::vector<int> labels(nodes);
  for (int i = 0; i < nodes; ++i) labels[i] = i % classes;
  std::shuffle(labels.begin(), labels.end(), rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) {
      const double p = labels[i] == labels[j] ? p_in : p_out;
      if (unit(rng) < p) edges.emplace_back(i, j);
    }
  }
  Graph g = make_graph(nodes, edges);

  std::normal_distribution<double> proto_noise(0.0, 0.6);
  std::vector<Matrix> prototypes;
  prototypes.reserve(classes);
  for (int c = 0; c < classes; ++c) {
    Matrix p(1, feature_dim);
    for (int d = 0; d < feature_dim; ++d) p(0, d) = (d % classes == c) ? 1.0 : 0.0;
    prototypes.push_back(std::move(p));
  }
  g.features = Matrix(nodes, feature_dim);
  for (int i = 0; i < nodes; ++i) {
    for (int d = 0; d < feature_dim; ++d) {
      g.features(i, d) = prototypes[labels[i]](0, d) + proto_noise(rng);
    }
  }
  g.labels = std::move(labels);
  g.split.assign(nodes, Split::train);
  return g;
}

}  // namespace matnet
