#include "emdlot/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace emdlot {

Tensor Tensor::zeros(std::vector<size_t> shape) {
  Tensor t;
  size_t n = 1;
  for (size_t d : shape) n *= d;
  t.shape = std::move(shape);
  t.v.assign(n, 0.0);
  return t;
}

Tensor Tensor::vec(std::vector<double> values) {
  Tensor t;
  t.shape = {values.size()};
  t.v = std::move(values);
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void Tensor::fill(double x) { std::fill(v.begin(), v.end(), x); }

Param::Param(std::string name, std::vector<size_t> shape) : name(std::move(name)) {
  value = Tensor::zeros(shape);
  grad = Tensor::zeros(value.shape);
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = x;
  for (double& e : out.v) e = sigmoid(e);
  return out;
}

std::vector<double> softmax_t(std::span<const double> logits, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax_t: tau must be positive");
  if (logits.empty()) throw std::invalid_argument("softmax_t: empty logits");
  double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - mx) / tau);
    sum += out[i];
  }
  for (double& e : out) e /= sum;
  return out;
}

}  // namespace emdlot
