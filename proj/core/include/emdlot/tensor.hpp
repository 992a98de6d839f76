#ifndef EMDLOT_TENSOR_HPP
#define EMDLOT_TENSOR_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace emdlot {

// Dense row-major tensor of 64-bit reals. Rank is 1 or 2 everywhere in this
// model; shape is kept generic for serialization.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  static Tensor zeros(std::vector<size_t> shape);
  static Tensor vec(std::vector<double> values);

  size_t numel() const { return v.size(); }
  size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(size_t i) { return v[i]; }
  double at(size_t i) const { return v[i]; }
  double& at(size_t i, size_t j) { return v[i * cols() + j]; }
  double at(size_t i, size_t j) const { return v[i * cols() + j]; }

  bool all_finite() const;
  void fill(double x);
};

// Learnable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string name, std::vector<size_t> shape);
  void zero_grad() { grad.fill(0.0); }
};

// Elementwise numerically stable logistic function; output in (0,1).
double sigmoid(double x);
Tensor sigmoid(const Tensor& x);

// Temperature softmax with max-subtraction; logits are divided by tau before
// exponentiation. Throws std::invalid_argument for tau <= 0 or empty input.
std::vector<double> softmax_t(std::span<const double> logits, double tau);

}  // namespace emdlot

#endif
