#ifndef EMDLOT_OPTIMIZER_HPP
#define EMDLOT_OPTIMIZER_HPP

#include <span>
#include <vector>

#include "emdlot/tensor.hpp"

namespace emdlot {

// Adaptive-moment gradient descent with decoupled weight decay.
class AdamW {
 public:
  AdamW(double learning_rate, double weight_decay, double beta1 = 0.9,
        double beta2 = 0.999, double eps = 1e-8);

  // Applies one update from the accumulated grads. Moment buffers are lazily
  // sized on first use; the param list must stay stable across steps.
  void step(std::span<Param* const> params);

  int steps() const { return t_; }

 private:
  double lr_, wd_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Rescales any row vector whose L2 norm exceeds max_norm back onto the ball.
void clip_norm(Param& p, double max_norm);

}  // namespace emdlot

#endif
