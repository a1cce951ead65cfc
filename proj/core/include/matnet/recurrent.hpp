#pragma once

#include <optional>
#include <vector>

#include "matnet/layers.hpp"

namespace matnet {

// Hidden (and, for the LSTM, memory-cell) matrices carried between steps.
struct RecurrentState {
  NodeId h = -1;
  NodeId c = -1;  // LSTM only
};

struct RecurrentStateValue {
  Matrix h;
  Matrix c;
};

enum class CellKind { rnn, lstm, gru };

CellKind cell_kind_from_string(const std::string& name);
std::string to_string(CellKind k);

// H_t = act(mat2(X_t, H_{t-1})).
struct RnnParams {
  Mat2Params state;
  Activation act = Activation::tanh;

  static RnnParams create(int in_rows, int in_cols, int hid_rows, int hid_cols,
                          std::mt19937_64& rng, Activation act = Activation::tanh);
};

// Gates I, F, O = sigm(mat2(X_t, H_{t-1})), candidate Chat = tanh(mat2(...)),
// C_t = F (.) C_{t-1} + I (.) Chat, H_t = O (.) tanh(C_t).
struct LstmParams {
  Mat2Params input_gate, forget_gate, output_gate, candidate;

  static LstmParams create(int in_rows, int in_cols, int hid_rows, int hid_cols,
                           std::mt19937_64& rng);
};

// Z, R = sigm(mat2(X_t, H_{t-1})), Hc = act(mat2(X_t, R (.) H_{t-1})),
// H_t = (1-Z) (.) H_{t-1} + Z (.) Hc.
struct GruParams {
  Mat2Params update_gate, reset_gate, candidate;
  Activation act = Activation::tanh;

  static GruParams create(int in_rows, int in_cols, int hid_rows, int hid_cols,
                          std::mt19937_64& rng, Activation act = Activation::tanh);
};

struct RnnNodes {
  Mat2Nodes state;
  Activation act;
};
struct LstmNodes {
  Mat2Nodes input_gate, forget_gate, output_gate, candidate;
};
struct GruNodes {
  Mat2Nodes update_gate, reset_gate, candidate;
  Activation act;
};

RnnNodes bind(Binder& b, RnnParams& p);
LstmNodes bind(Binder& b, LstmParams& p);
GruNodes bind(Binder& b, GruParams& p);

NodeId rnn_step(Tape& t, NodeId x, NodeId h_prev, const RnnNodes& p);
RecurrentState lstm_step(Tape& t, NodeId x, RecurrentState state, const LstmNodes& p);
NodeId gru_step(Tape& t, NodeId x, NodeId h_prev, const GruNodes& p);

Matrix rnn_step_eval(const Matrix& x, const Matrix& h_prev, const RnnParams& p);
RecurrentStateValue lstm_step_eval(const Matrix& x, const RecurrentStateValue& state,
                                   const LstmParams& p);
Matrix gru_step_eval(const Matrix& x, const Matrix& h_prev, const GruParams& p);

// One recurrent cell of any kind, with uniform step/bind plumbing so unrolls
// and sequence models are written once.
class RecurrentCell {
 public:
  RecurrentCell() = default;
  static RecurrentCell create(CellKind kind, int in_rows, int in_cols, int hid_rows,
                              int hid_cols, std::mt19937_64& rng);

  CellKind kind() const { return kind_; }
  int hidden_rows() const { return hid_rows_; }
  int hidden_cols() const { return hid_cols_; }

  std::size_t parameter_total() const;

  // Registers this cell's parameters; must be called once per tape before steps.
  void bind(Binder& b);
  RecurrentState step(Tape& t, NodeId x, RecurrentState state) const;

  RecurrentStateValue step_eval(const Matrix& x, const RecurrentStateValue& state) const;
  RecurrentStateValue initial_state() const;
  RecurrentState initial_state(Tape& t) const;

  RnnParams rnn;
  LstmParams lstm;
  GruParams gru;

 private:
  CellKind kind_ = CellKind::rnn;
  int hid_rows_ = 0, hid_cols_ = 0;
  RnnNodes rnn_nodes_;
  LstmNodes lstm_nodes_;
  GruNodes gru_nodes_;
  bool bound_ = false;
};

// Iterated cell application over an input sequence; the full state sequence
// stays on the tape so gradients flow through every step.
std::vector<RecurrentState> unroll(Tape& t, RecurrentCell& cell,
                                   const std::vector<NodeId>& inputs,
                                   RecurrentState initial);

std::vector<RecurrentStateValue> unroll_eval(const RecurrentCell& cell,
                                             const std::vector<Matrix>& inputs,
                                             RecurrentStateValue initial);

// Encoder consumes the input frames; the decoder starts from the final
// encoder state, is driven by zero input matrices (no readout connections),
// and emits sigma_Y(mat1(H_t)) per step.
struct Seq2SeqOutput {
  std::vector<NodeId> outputs;
  RecurrentState encoder_final;
};
Seq2SeqOutput seq2seq_forward(Tape& t, RecurrentCell& encoder, RecurrentCell& decoder,
                              const Mat1Nodes& head, Activation head_act,
                              const std::vector<NodeId>& inputs, int horizon);

std::vector<Matrix> seq2seq_forward_eval(const RecurrentCell& encoder,
                                         const RecurrentCell& decoder,
                                         const Mat1Params& head, Activation head_act,
                                         const std::vector<Matrix>& inputs, int horizon);

}  // namespace matnet
