#include "emdlot/grad_check.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace emdlot {

GradCheckResult grad_check(const std::function<double(bool with_grad)>& f,
                           std::span<Param* const> params, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");

  for (Param* p : params) p->zero_grad();
  const double base = f(true);
  if (!std::isfinite(base))
    throw std::runtime_error("grad_check: non-finite objective at base point");

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Param* p : params) analytic.push_back(p->grad.v);

  GradCheckResult result;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param& p = *params[pi];
    for (size_t k = 0; k < p.value.numel(); ++k) {
      const double orig = p.value.v[k];
      p.value.v[k] = orig + eps;
      const double plus = f(false);
      p.value.v[k] = orig - eps;
      const double minus = f(false);
      p.value.v[k] = orig;
      if (!std::isfinite(plus) || !std::isfinite(minus))
        throw std::runtime_error("grad_check: non-finite objective at " + p.name + "[" +
                                 std::to_string(k) + "]");
      const double numeric = (plus - minus) / (2.0 * eps);
      const double rel = std::abs(analytic[pi][k] - numeric) / (std::abs(numeric) + 1e-8);
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_coordinate = p.name + "[" + std::to_string(k) + "]";
      }
    }
  }
  return result;
}

}  // namespace emdlot
