#include "matnet/recurrent.hpp"

namespace matnet {

CellKind cell_kind_from_string(const std::string& name) {
  if (name == "rnn") return CellKind::rnn;
  if (name == "lstm") return CellKind::lstm;
  if (name == "gru") return CellKind::gru;
  throw ValueError("unknown cell kind '" + name + "'");
}

std::string to_string(CellKind k) {
  switch (k) {
    case CellKind::rnn: return "rnn";
    case CellKind::lstm: return "lstm";
    case CellKind::gru: return "gru";
  }
  return "rnn";
}

RnnParams RnnParams::create(int in_rows, int in_cols, int hid_rows, int hid_cols,
                            std::mt19937_64& rng, Activation act) {
  RnnParams p;
  p.state = Mat2Params::create(in_rows, in_cols, hid_rows, hid_cols, hid_rows, hid_cols, rng);
  p.act = act;
  return p;
}

LstmParams LstmParams::create(int in_rows, int in_cols, int hid_rows, int hid_cols,
                              std::mt19937_64& rng) {
  LstmParams p;
  auto gate = [&] {
    return Mat2Params::create(in_rows, in_cols, hid_rows, hid_cols, hid_rows, hid_cols, rng);
  };
  p.input_gate = gate();
  p.forget_gate = gate();
  p.output_gate = gate();
  p.candidate = gate();
  return p;
}

GruParams GruParams::create(int in_rows, int in_cols, int hid_rows, int hid_cols,
                            std::mt19937_64& rng, Activation act) {
  GruParams p;
  auto gate = [&] {
    return Mat2Params::create(in_rows, in_cols, hid_rows, hid_cols, hid_rows, hid_cols, rng);
  };
  p.update_gate = gate();
  p.reset_gate = gate();
  p.candidate = gate();
  p.act = act;
  return p;
}

RnnNodes bind(Binder& b, RnnParams& p) { return {b.bind(p.state), p.act}; }

LstmNodes bind(Binder& b, LstmParams& p) {
  return {b.bind(p.input_gate), b.bind(p.forget_gate), b.bind(p.output_gate),
          b.bind(p.candidate)};
}

GruNodes bind(Binder& b, GruParams& p) {
  return {b.bind(p.update_gate), b.bind(p.reset_gate), b.bind(p.candidate), p.act};
}

NodeId rnn_step(Tape& t, NodeId x, NodeId h_prev, const RnnNodes& p) {
  return t.activation(mat2(t, x, h_prev, p.state), p.act);
}

RecurrentState lstm_step(Tape& t, NodeId x, RecurrentState state, const LstmNodes& p) {
  NodeId i = t.sigmoid(mat2(t, x, state.h, p.input_gate));
  NodeId f = t.sigmoid(mat2(t, x, state.h, p.forget_gate));
  NodeId o = t.sigmoid(mat2(t, x, state.h, p.output_gate));
  NodeId cand = t.tanh_elem(mat2(t, x, state.h, p.candidate));
  NodeId c = t.add(t.hadamard(f, state.c), t.hadamard(i, cand));
  NodeId h = t.hadamard(o, t.tanh_elem(c));
  return {h, c};
}

NodeId gru_step(Tape& t, NodeId x, NodeId h_prev, const GruNodes& p) {
  NodeId z = t.sigmoid(mat2(t, x, h_prev, p.update_gate));
  NodeId r = t.sigmoid(mat2(t, x, h_prev, p.reset_gate));
  NodeId cand = t.activation(mat2(t, x, t.hadamard(r, h_prev), p.candidate), p.act);
  NodeId keep = t.sub(h_prev, t.hadamard(z, h_prev));
  return t.add(keep, t.hadamard(z, cand));
}

Matrix rnn_step_eval(const Matrix& x, const Matrix& h_prev, const RnnParams& p) {
  return apply_activation(mat2_eval(x, h_prev, p.state), p.act);
}

RecurrentStateValue lstm_step_eval(const Matrix& x, const RecurrentStateValue& state,
                                   const LstmParams& p) {
  Matrix i = sigmoid(mat2_eval(x, state.h, p.input_gate));
  Matrix f = sigmoid(mat2_eval(x, state.h, p.forget_gate));
  Matrix o = sigmoid(mat2_eval(x, state.h, p.output_gate));
  Matrix cand = tanh_elem(mat2_eval(x, state.h, p.candidate));
  Matrix c = add(hadamard(f, state.c), hadamard(i, cand));
  Matrix h = hadamard(o, tanh_elem(c));
  return {std::move(h), std::move(c)};
}

Matrix gru_step_eval(const Matrix& x, const Matrix& h_prev, const GruParams& p) {
  Matrix z = sigmoid(mat2_eval(x, h_prev, p.update_gate));
  Matrix r = sigmoid(mat2_eval(x, h_prev, p.reset_gate));
  Matrix cand = apply_activation(mat2_eval(x, hadamard(r, h_prev), p.candidate), p.act);
  return add(sub(h_prev, hadamard(z, h_prev)), hadamard(z, cand));
}

RecurrentCell RecurrentCell::create(CellKind kind, int in_rows, int in_cols,
                                    int hid_rows, int hid_cols, std::mt19937_64& rng) {
  RecurrentCell cell;
  cell.kind_ = kind;
  cell.hid_rows_ = hid_rows;
  cell.hid_cols_ = hid_cols;
  switch (kind) {
    case CellKind::rnn:
      cell.rnn = RnnParams::create(in_rows, in_cols, hid_rows, hid_cols, rng);
      break;
    case CellKind::lstm:
      cell.lstm = LstmParams::create(in_rows, in_cols, hid_rows, hid_cols, rng);
      break;
    case CellKind::gru:
      cell.gru = GruParams::create(in_rows, in_cols, hid_rows, hid_cols, rng);
      break;
  }
  return cell;
}

std::size_t RecurrentCell::parameter_total() const {
  switch (kind_) {
    case CellKind::rnn:
      return rnn.state.parameter_total();
    case CellKind::lstm:
      return lstm.input_gate.parameter_total() + lstm.forget_gate.parameter_total() +
             lstm.output_gate.parameter_total() + lstm.candidate.parameter_total();
    case CellKind::gru:
      return gru.update_gate.parameter_total() + gru.reset_gate.parameter_total() +
             gru.candidate.parameter_total();
  }
  return 0;
}

void RecurrentCell::bind(Binder& b) {
  switch (kind_) {
    case CellKind::rnn: rnn_nodes_ = matnet::bind(b, rnn); break;
    case CellKind::lstm: lstm_nodes_ = matnet::bind(b, lstm); break;
    case CellKind::gru: gru_nodes_ = matnet::bind(b, gru); break;
  }
  bound_ = true;
}

RecurrentState RecurrentCell::step(Tape& t, NodeId x, RecurrentState state) const {
  if (!bound_) throw ValueError("recurrent cell: step before bind");
  switch (kind_) {
    case CellKind::rnn:
      return {rnn_step(t, x, state.h, rnn_nodes_), -1};
    case CellKind::lstm:
      return lstm_step(t, x, state, lstm_nodes_);
    case CellKind::gru:
      return {gru_step(t, x, state.h, gru_nodes_), -1};
  }
  return state;
}

RecurrentStateValue RecurrentCell::step_eval(const Matrix& x,
                                             const RecurrentStateValue& state) const {
  switch (kind_) {
    case CellKind::rnn:
      return {rnn_step_eval(x, state.h, rnn), Matrix()};
    case CellKind::lstm:
      return lstm_step_eval(x, state, lstm);
    case CellKind::gru:
      return {gru_step_eval(x, state.h, gru), Matrix()};
  }
  return state;
}

RecurrentStateValue RecurrentCell::initial_state() const {
  RecurrentStateValue s;
  s.h = Matrix(hid_rows_, hid_cols_);
  if (kind_ == CellKind::lstm) s.c = Matrix(hid_rows_, hid_cols_);
  return s;
}

RecurrentState RecurrentCell::initial_state(Tape& t) const {
  RecurrentState s;
  s.h = t.constant(Matrix(hid_rows_, hid_cols_));
  if (kind_ == CellKind::lstm) s.c = t.constant(Matrix(hid_rows_, hid_cols_));
  return s;
}

std::vector<RecurrentState> unroll(Tape& t, RecurrentCell& cell,
                                   const std::vector<NodeId>& inputs,
                                   RecurrentState initial) {
  if (inputs.empty()) throw ValueError("unroll: need at least one input");
  const Matrix& first = t.value(inputs[0]);
  for (NodeId x : inputs) {
    if (!t.value(x).same_shape(first)) {
      throw ShapeError("unroll: inconsistent input shapes " + first.shape_str() +
                       " vs " + t.value(x).shape_str());
    }
  }
  std::vector<RecurrentState> states;
  states.reserve(inputs.size());
  RecurrentState s = initial;
  for (NodeId x : inputs) {
    s = cell.step(t, x, s);
    states.push_back(s);
  }
  return states;
}

std::vector<RecurrentStateValue> unroll_eval(const RecurrentCell& cell,
                                             const std::vector<Matrix>& inputs,
                                             RecurrentStateValue initial) {
  if (inputs.empty()) throw ValueError("unroll: need at least one input");
  std::vector<RecurrentStateValue> states;
  states.reserve(inputs.size());
  RecurrentStateValue s = std::move(initial);
  for (const Matrix& x : inputs) {
    s = cell.step_eval(x, s);
    states.push_back(s);
  }
  return states;
}

Seq2SeqOutput seq2seq_forward(Tape& t, RecurrentCell& encoder, RecurrentCell& decoder,
                              const Mat1Nodes& head, Activation head_act,
                              const std::vector<NodeId>& inputs, int horizon) {
  if (horizon < 1) throw ValueError("seq2seq: horizon must be >= 1");
  if (encoder.hidden_rows() != decoder.hidden_rows() ||
      encoder.hidden_cols() != decoder.hidden_cols()) {
    throw ShapeError("seq2seq: encoder and decoder hidden shapes differ");
  }
  auto enc_states = unroll(t, encoder, inputs, encoder.initial_state(t));
  Seq2SeqOutput out;
  out.encoder_final = enc_states.back();
  RecurrentState s = out.encoder_final;
  if (decoder.kind() == CellKind::lstm && s.c < 0) {
    s.c = t.constant(Matrix(decoder.hidden_rows(), decoder.hidden_cols()));
  }
  const Matrix& frame = t.value(inputs[0]);
  NodeId zero_input = t.constant(Matrix(frame.rows(), frame.cols()));
  out.outputs.reserve(horizon);
  for (int k = 0; k < horizon; ++k) {
    s = decoder.step(t, zero_input, s);
    out.outputs.push_back(t.activation(mat1(t, s.h, head), head_act));
  }
  return out;
}

std::vector<Matrix> seq2seq_forward_eval(const RecurrentCell& encoder,
                                         const RecurrentCell& decoder,
                                         const Mat1Params& head, Activation head_act,
                                         const std::vector<Matrix>& inputs, int horizon) {
  if (horizon < 1) throw ValueError("seq2seq: horizon must be >= 1");
  if (encoder.hidden_rows() != decoder.hidden_rows() ||
      encoder.hidden_cols() != decoder.hidden_cols()) {
    throw ShapeError("seq2seq: encoder and decoder hidden shapes differ");
  }
  auto enc_states = unroll_eval(encoder, inputs, encoder.initial_state());
  RecurrentStateValue s = enc_states.back();
  if (decoder.kind() == CellKind::lstm && s.c.empty()) {
    s.c = Matrix(decoder.hidden_rows(), decoder.hidden_cols());
  }
  Matrix zero_input(inputs[0].rows(), inputs[0].cols());
  std::vector<Matrix> outputs;
  outputs.reserve(horizon);
  for (int k = 0; k < horizon; ++k) {
    s = decoder.step_eval(zero_input, s);
    outputs.push_back(apply_activation(mat1_eval(s.h, head), head_act));
  }
  return outputs;
}

}  // namespace matnet
