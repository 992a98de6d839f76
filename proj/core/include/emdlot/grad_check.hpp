#ifndef EMDLOT_GRAD_CHECK_HPP
#define EMDLOT_GRAD_CHECK_HPP

#include <functional>
#include <span>
#include <string>

#include "emdlot/tensor.hpp"

namespace emdlot {

struct GradCheckResult {
  double max_rel_err = 0.0;
  // "param[index]" of the worst coordinate, for diagnostics.
  std::string worst_coordinate;
};

// Compares analytic gradients against central differences.
//
// `f(with_grad)` evaluates the scalar objective at the current parameter
// values; when with_grad is true it must also accumulate d f / d theta into
// each Param.grad (grads are zeroed here before the call). The relative error
// per coordinate is |analytic - numeric| / (|numeric| + 1e-8).
//
// Throws std::runtime_error naming the offending coordinate if any
// evaluation of f is non-finite.
GradCheckResult grad_check(const std::function<double(bool with_grad)>& f,
                           std::span<Param* const> params, double eps);

}  // namespace emdlot

#endif
