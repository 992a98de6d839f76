#include "emdlot/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace emdlot {

AdamW::AdamW(double learning_rate, double weight_decay, double beta1, double beta2,
             double eps)
    : lr_(learning_rate), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamW::step(std::span<Param* const> params) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i]->value.numel(), 0.0);
      v_[i].assign(params[i]->value.numel(), 0.0);
    }
  }
  if (m_.size() != params.size())
    throw std::invalid_argument("AdamW: param list changed between steps");

  t_++;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    for (size_t k = 0; k < p.value.numel(); ++k) {
      const double g = p.grad.v[k];
      m_[i][k] = beta1_ * m_[i][k] + (1.0 - beta1_) * g;
      v_[i][k] = beta2_ * v_[i][k] + (1.0 - beta2_) * g * g;
      const double m_hat = m_[i][k] / bc1;
      const double v_hat = v_[i][k] / bc2;
      p.value.v[k] -= lr_ * (m_hat / (std::sqrt(v_hat) + eps_) + wd_ * p.value.v[k]);
    }
  }
}

void clip_norm(Param& p, double max_norm) {
  double sq = 0.0;
  for (double v : p.value.v) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double& v : p.value.v) v *= s;
  }
}

}  // namespace emdlot
