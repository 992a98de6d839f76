#ifndef EMDLOT_TLSTM_HPP
#define EMDLOT_TLSTM_HPP

#include <span>
#include <string>
#include <vector>

#include "emdlot/rng.hpp"
#include "emdlot/tape.hpp"
#include "emdlot/tensor.hpp"

namespace emdlot {

// Time-aware LSTM cell: the previous memory cell is attenuated by a learned
// gate of the elapsed months between observations before the standard gate
// updates run. Biases on the i/f/o/candidate gates are included, with the
// forget bias initialized to 1.
struct TLstmParams {
  int hidden = 0;
  int input = 0;
  Param W_T, b_T;  // decay gate; W_T acts on the scalar delta_t
  Param W_i, U_i, b_i;
  Param W_f, U_f, b_f;
  Param W_o, U_o, b_o;
  Param W_c, U_c, b_c;

  TLstmParams() = default;
  TLstmParams(int hidden, int input);
  // uniform(-1/sqrt(hidden), 1/sqrt(hidden)) for matrices, zero biases
  // except b_f = 1.
  void init(SeededRng& rng);
  void collect(std::vector<Param*>& out);
};

struct TLstmState {
  Tensor c, h;
  static TLstmState zero(int hidden);
};

// Node ids of the parameters bound to one tape.
struct TLstmNodeIds {
  int W_T, b_T;
  int W_i, U_i, b_i, W_f, U_f, b_f, W_o, U_o, b_o, W_c, U_c, b_c;
};
TLstmNodeIds bind(Tape& tape, TLstmParams& p);

struct CellNodes {
  int c = -1;
  int h = -1;
};

// One cell update on the tape. x must be an input-sized vector node. With
// bypass_decay the decay gate is forced to 1 and the cell is a standard LSTM.
CellNodes tlstm_cell_graph(Tape& tape, const TLstmNodeIds& ids, int x,
                           double delta_t, const CellNodes& state,
                           bool bypass_decay = false);

struct EncodeStep {
  int x = -1;          // input vector node; ignored when valid is false
  double delta_t = 0;  // months since the previous grid step
  bool valid = true;
};

struct EncodeNodes {
  int h_last = -1;
  std::vector<CellNodes> states;   // state per valid step, in order
  std::vector<int> valid_indices;  // positions of valid steps in the input
};

// Runs the cell over a padded step sequence. Invalid steps leave the state
// untouched; their delta_t accumulates into the next valid step so a masked
// gap is equivalent to a longer elapsed time. Throws if no step is valid.
EncodeNodes tlstm_encode_graph(Tape& tape, const TLstmNodeIds& ids,
                               std::span<const EncodeStep> steps,
                               bool bypass_decay = false,
                               const std::string& sequence_id = "");

// Eager wrappers over a throwaway tape.

// T_t = sigmoid(W_T * delta_t + b_T); throws for negative delta_t.
Tensor decay_gate(double delta_t, TLstmParams& params);

TLstmState cell_step(const Tensor& x, double delta_t, const TLstmState& state,
                     TLstmParams& params, bool bypass_decay = false);

struct EncodeResult {
  Tensor h_last;
  std::vector<Tensor> h_all;       // per valid step
  std::vector<TLstmState> states;  // per valid step
};

struct EagerStep {
  Tensor x;
  double delta_t = 0;
  bool valid = true;
};

EncodeResult encode(std::span<const EagerStep> steps, TLstmParams& params,
                    bool bypass_decay = false, const std::string& sequence_id = "");

}  // namespace emdlot

#endif
