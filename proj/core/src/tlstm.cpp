#include "emdlot/tlstm.hpp"

#include <cmath>
#include <stdexcept>

namespace emdlot {

namespace {

void init_uniform(Param& p, SeededRng& rng, double bound) {
  for (double& v : p.value.v) v = rng.uniform(-bound, bound);
}

}  // namespace

TLstmParams::TLstmParams(int hidden, int input)
    : hidden(hidden),
      input(input),
      W_T("tlstm.W_T", {static_cast<size_t>(hidden)}),
      b_T("tlstm.b_T", {static_cast<size_t>(hidden)}),
      W_i("tlstm.W_i", {static_cast<size_t>(hidden), static_cast<size_t>(input)}),
      U_i("tlstm.U_i", {static_cast<size_t>(hidden), static_cast<size_t>(hidden)}),
      b_i("tlstm.b_i", {static_cast<size_t>(hidden)}),
      W_f("tlstm.W_f", {static_cast<size_t>(hidden), static_cast<size_t>(input)}),
      U_f("tlstm.U_f", {static_cast<size_t>(hidden), static_cast<size_t>(hidden)}),
      b_f("tlstm.b_f", {static_cast<size_t>(hidden)}),
      W_o("tlstm.W_o", {static_cast<size_t>(hidden), static_cast<size_t>(input)}),
      U_o("tlstm.U_o", {static_cast<size_t>(hidden), static_cast<size_t>(hidden)}),
      b_o("tlstm.b_o", {static_cast<size_t>(hidden)}),
      W_c("tlstm.W_c", {static_cast<size_t>(hidden), static_cast<size_t>(input)}),
      U_c("tlstm.U_c", {static_cast<size_t>(hidden), static_cast<size_t>(hidden)}),
      b_c("tlstm.b_c", {static_cast<size_t>(hidden)}) {}

void TLstmParams::init(SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  init_uniform(W_T, rng, bound);
  for (Param* m : {&W_i, &U_i, &W_f, &U_f, &W_o, &U_o, &W_c, &U_c})
    init_uniform(*m, rng, bound);
  b_f.value.fill(1.0);
}

void TLstmParams::collect(std::vector<Param*>& out) {
  for (Param* p : {&W_T, &b_T, &W_i, &U_i, &b_i, &W_f, &U_f, &b_f, &W_o, &U_o, &b_o,
                   &W_c, &U_c, &b_c})
    out.push_back(p);
}

TLstmState TLstmState::zero(int hidden) {
  TLstmState s;
  s.c = Tensor::zeros({static_cast<size_t>(hidden)});
  s.h = Tensor::zeros({static_cast<size_t>(hidden)});
  return s;
}

TLstmNodeIds bind(Tape& tape, TLstmParams& p) {
  TLstmNodeIds ids;
  ids.W_T = tape.param(p.W_T);
  ids.b_T = tape.param(p.b_T);
  ids.W_i = tape.param(p.W_i);
  ids.U_i = tape.param(p.U_i);
  ids.b_i = tape.param(p.b_i);
  ids.W_f = tape.param(p.W_f);
  ids.U_f = tape.param(p.U_f);
  ids.b_f = tape.param(p.b_f);
  ids.W_o = tape.param(p.W_o);
  ids.U_o = tape.param(p.U_o);
  ids.b_o = tape.param(p.b_o);
  ids.W_c = tape.param(p.W_c);
  ids.U_c = tape.param(p.U_c);
  ids.b_c = tape.param(p.b_c);
  return ids;
}

CellNodes tlstm_cell_graph(Tape& tape, const TLstmNodeIds& ids, int x,
                           double delta_t, const CellNodes& state,
                           bool bypass_decay) {
  if (delta_t < 0.0) throw std::invalid_argument("tlstm: delta_t must be >= 0");

  // Decayed memory.
  int c_decayed;
  if (bypass_decay) {
    c_decayed = state.c;
  } else {
    const int pre = tape.add(tape.scale(ids.W_T, delta_t), ids.b_T);
    const int gate = tape.sigmoid(pre);
    c_decayed = tape.hadamard(gate, state.c);
  }

  const int i_gate = tape.sigmoid(tape.add(tape.affine(ids.W_i, x, ids.b_i),
                                           tape.matvec(ids.U_i, state.h)));
  const int f_gate = tape.sigmoid(tape.add(tape.affine(ids.W_f, x, ids.b_f),
                                           tape.matvec(ids.U_f, state.h)));
  const int o_gate = tape.sigmoid(tape.add(tape.affine(ids.W_o, x, ids.b_o),
                                           tape.matvec(ids.U_o, state.h)));
  const int candidate = tape.tanh(tape.add(tape.affine(ids.W_c, x, ids.b_c),
                                           tape.matvec(ids.U_c, state.h)));

  CellNodes next;
  next.c = tape.add(tape.hadamard(f_gate, c_decayed), tape.hadamard(i_gate, candidate));
  next.h = tape.hadamard(o_gate, tape.tanh(next.c));
  return next;
}

EncodeNodes tlstm_encode_graph(Tape& tape, const TLstmNodeIds& ids,
                               std::span<const EncodeStep> steps, bool bypass_decay,
                               const std::string& sequence_id) {
  const size_t hidden = tape.dim(ids.b_T);
  std::vector<double> zeros(hidden, 0.0);
  CellNodes state{tape.constant(zeros, hidden), tape.constant(zeros, hidden)};

  EncodeNodes out;
  double carry = 0.0;
  for (size_t t = 0; t < steps.size(); ++t) {
    if (!steps[t].valid) {
      carry += steps[t].delta_t;
      continue;
    }
    state = tlstm_cell_graph(tape, ids, steps[t].x, steps[t].delta_t + carry, state,
                             bypass_decay);
    carry = 0.0;
    out.states.push_back(state);
    out.valid_indices.push_back(static_cast<int>(t));
  }
  if (out.states.empty())
    throw std::invalid_argument("tlstm: sequence has no valid steps" +
                                (sequence_id.empty() ? "" : " (" + sequence_id + ")"));
  out.h_last = out.states.back().h;
  return out;
}

Tensor decay_gate(double delta_t, TLstmParams& params) {
  if (delta_t < 0.0) throw std::invalid_argument("decay_gate: delta_t must be >= 0");
  Tape tape;
  const int wt = tape.param(params.W_T);
  const int bt = tape.param(params.b_T);
  const int gate = tape.sigmoid(tape.add(tape.scale(wt, delta_t), bt));
  Tensor out = Tensor::zeros({static_cast<size_t>(params.hidden)});
  auto v = tape.values(gate);
  std::copy(v.begin(), v.end(), out.v.begin());
  return out;
}

TLstmState cell_step(const Tensor& x, double delta_t, const TLstmState& state,
                     TLstmParams& params, bool bypass_decay) {
  if (static_cast<int>(x.numel()) != params.input)
    throw std::invalid_argument("cell_step: input size mismatch");
  if (static_cast<int>(state.h.numel()) != params.hidden)
    throw std::invalid_argument("cell_step: state size mismatch");
  Tape tape;
  const auto ids = bind(tape, params);
  const int xn = tape.constant(x.v, x.numel());
  CellNodes st{tape.constant(state.c.v, state.c.numel()),
               tape.constant(state.h.v, state.h.numel())};
  const auto next = tlstm_cell_graph(tape, ids, xn, delta_t, st, bypass_decay);
  TLstmState out = TLstmState::zero(params.hidden);
  auto cv = tape.values(next.c);
  auto hv = tape.values(next.h);
  std::copy(cv.begin(), cv.end(), out.c.v.begin());
  std::copy(hv.begin(), hv.end(), out.h.v.begin());
  return out;
}

EncodeResult encode(std::span<const EagerStep> steps, TLstmParams& params,
                    bool bypass_decay, const std::string& sequence_id) {
  Tape tape;
  const auto ids = bind(tape, params);
  std::vector<EncodeStep> graph_steps;
  graph_steps.reserve(steps.size());
  for (const auto& s : steps) {
    EncodeStep gs;
    gs.valid = s.valid;
    gs.delta_t = s.delta_t;
    gs.x = s.valid ? tape.constant(s.x.v, s.x.numel()) : -1;
    graph_steps.push_back(gs);
  }
  const auto nodes = tlstm_encode_graph(tape, ids, graph_steps, bypass_decay, sequence_id);

  EncodeResult res;
  res.h_last = Tensor::zeros({static_cast<size_t>(params.hidden)});
  auto hv = tape.values(nodes.h_last);
  std::copy(hv.begin(), hv.end(), res.h_last.v.begin());
  for (const auto& st : nodes.states) {
    TLstmState s = TLstmState::zero(params.hidden);
    auto cv = tape.values(st.c);
    auto hv2 = tape.values(st.h);
    std::copy(cv.begin(), cv.end(), s.c.v.begin());
    std::copy(hv2.begin(), hv2.end(), s.h.v.begin());
    res.h_all.push_back(s.h);
    res.states.push_back(std::move(s));
  }
  return res;
}

}  // namespace emdlot
