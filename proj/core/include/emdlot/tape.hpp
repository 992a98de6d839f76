#ifndef EMDLOT_TAPE_HPP
#define EMDLOT_TAPE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "emdlot/tensor.hpp"

namespace emdlot {

// Define-by-run reverse-mode tape over the small fixed operation set the
// model needs: affine maps, elementwise sigmoid/tanh, temperature softmax,
// dot products, weighted sums and scalar reductions. Values are computed
// eagerly when a node is created; backward() accumulates gradients into the
// bound Params.
//
// Node handles are plain ints valid until clear(). One tape per batch; the
// tape owns all intermediate storage.
class Tape {
 public:
  enum class Op : uint8_t {
    kConst,
    kParam,
    kMatVec,        // A (m×n) · x (n)
    kAffine,        // A·x + b
    kAdd,
    kSub,
    kHadamard,
    kScaleConst,    // c · x
    kAddConst,      // x + c, elementwise
    kSigmoid,
    kTanh,
    kSoftmaxT,
    kDot,
    kNegLogPick,    // -log(max(x[i], kLogClamp))
    kStack,         // scalars -> vector
    kWeightedSum,   // sum_i alpha[i] · v_i, alpha a vector node
    kWeightedSumC,  // sum_i w_i · v_i, w_i constants
    kLinComb,       // sum_i w_i · s_i over scalar nodes
    kNegEntropy,    // sum_i x_i log x_i, terms with x_i < clamp contribute 0
    kSqrtS,         // scalar sqrt
    kRowScale,      // c · M[row,:]
  };

  static constexpr double kLogClamp = 1e-12;

  int constant(std::span<const double> values, size_t rows, size_t cols = 1);
  int constant_scalar(double v);
  int param(Param& p);

  int matvec(int a, int x);
  int affine(int a, int x, int b);
  int add(int x, int y);
  int sub(int x, int y);
  int hadamard(int x, int y);
  int scale(int x, double c);
  int add_const(int x, double c);
  int sigmoid(int x);
  int tanh(int x);
  int softmax_t(int x, double tau);
  int dot(int x, int y);
  int neg_log_pick(int x, size_t index);
  int stack(std::span<const int> scalars);
  int weighted_sum(int alpha, std::span<const int> vecs);
  int weighted_sum_const(std::span<const int> vecs, std::span<const double> weights);
  int lin_comb(std::span<const int> scalars, std::span<const double> weights);
  int neg_entropy(int x);
  int sqrt(int s);
  int row_scale(int m, size_t row, double c);

  double value(int node) const;
  std::span<const double> values(int node) const;
  size_t dim(int node) const;

  // Seeds d(root)/d(root) = 1 and accumulates into every bound Param.grad.
  // The root must be scalar. May be called once per tape.
  void backward(int root);

  size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Op op;
    size_t rows = 0, cols = 1;
    int a = -1, b = -1, c = -1;
    std::vector<int> many;
    std::vector<double> weights;
    double aux = 0.0;
    size_t index = 0;
    std::vector<double> val;
    std::vector<double> grad;
    const double* ext_val = nullptr;
    double* ext_grad = nullptr;

    size_t n() const { return rows * cols; }
    const double* vp() const { return ext_val ? ext_val : val.data(); }
  };

  int push(Node n);
  const Node& at(int i) const { return nodes_[static_cast<size_t>(i)]; }
  Node& at(int i) { return nodes_[static_cast<size_t>(i)]; }
  void check_vec(int i, const char* who) const;

  std::vector<Node> nodes_;
};

}  // namespace emdlot

#endif
