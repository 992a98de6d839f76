#include "emdlot/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace emdlot {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument("tape: " + msg);
}

}  // namespace

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_vec(int i, const char* who) const {
  require(i >= 0 && static_cast<size_t>(i) < nodes_.size(), std::string(who) + ": bad node id");
  require(at(i).cols == 1, std::string(who) + ": expected a vector node");
}

int Tape::constant(std::span<const double> values, size_t rows, size_t cols) {
  require(values.size() == rows * cols, "constant: size mismatch");
  Node n;
  n.op = Op::kConst;
  n.rows = rows;
  n.cols = cols;
  n.val.assign(values.begin(), values.end());
  return push(std::move(n));
}

int Tape::constant_scalar(double v) {
  double buf[1] = {v};
  return constant(std::span<const double>(buf, 1), 1, 1);
}

int Tape::param(Param& p) {
  Node n;
  n.op = Op::kParam;
  n.rows = p.value.rows();
  n.cols = p.value.cols();
  n.ext_val = p.value.v.data();
  n.ext_grad = p.grad.v.data();
  return push(std::move(n));
}

int Tape::matvec(int a, int x) {
  check_vec(x, "matvec");
  const Node& A = at(a);
  const Node& X = at(x);
  require(A.cols == X.rows, "matvec: dimension mismatch");
  Node n;
  n.op = Op::kMatVec;
  n.rows = A.rows;
  n.a = a;
  n.b = x;
  n.val.assign(n.rows, 0.0);
  const double* ap = A.vp();
  const double* xp = X.vp();
  for (size_t i = 0; i < A.rows; ++i) {
    double s = 0.0;
    const double* row = ap + i * A.cols;
    for (size_t j = 0; j < A.cols; ++j) s += row[j] * xp[j];
    n.val[i] = s;
  }
  return push(std::move(n));
}

int Tape::affine(int a, int x, int b) {
  check_vec(x, "affine");
  check_vec(b, "affine");
  const Node& A = at(a);
  const Node& X = at(x);
  const Node& B = at(b);
  require(A.cols == X.rows && A.rows == B.rows, "affine: dimension mismatch");
  Node n;
  n.op = Op::kAffine;
  n.rows = A.rows;
  n.a = a;
  n.b = x;
  n.c = b;
  n.val.assign(n.rows, 0.0);
  const double* ap = A.vp();
  const double* xp = X.vp();
  const double* bp = B.vp();
  for (size_t i = 0; i < A.rows; ++i) {
    double s = bp[i];
    const double* row = ap + i * A.cols;
    for (size_t j = 0; j < A.cols; ++j) s += row[j] * xp[j];
    n.val[i] = s;
  }
  return push(std::move(n));
}

int Tape::add(int x, int y) {
  const Node& X = at(x);
  const Node& Y = at(y);
  require(X.n() == Y.n(), "add: size mismatch");
  Node n;
  n.op = Op::kAdd;
  n.rows = X.rows;
  n.cols = X.cols;
  n.a = x;
  n.b = y;
  n.val.resize(X.n());
  for (size_t i = 0; i < X.n(); ++i) n.val[i] = X.vp()[i] + Y.vp()[i];
  return push(std::move(n));
}

int Tape::sub(int x, int y) {
  const Node& X = at(x);
  const Node& Y = at(y);
  require(X.n() == Y.n(), "sub: size mismatch");
  Node n;
  n.op = Op::kSub;
  n.rows = X.rows;
  n.cols = X.cols;
  n.a = x;
  n.b = y;
  n.val.resize(X.n());
  for (size_t i = 0; i < X.n(); ++i) n.val[i] = X.vp()[i] - Y.vp()[i];
  return push(std::move(n));
}

int Tape::hadamard(int x, int y) {
  const Node& X = at(x);
  const Node& Y = at(y);
  require(X.n() == Y.n(), "hadamard: size mismatch");
  Node n;
  n.op = Op::kHadamard;
  n.rows = X.rows;
  n.cols = X.cols;
  n.a = x;
  n.b = y;
  n.val.resize(X.n());
  for (size_t i = 0; i < X.n(); ++i) n.val[i] = X.vp()[i] * Y.vp()[i];
  return push(std::move(n));
}

int Tape::scale(int x, double c) {
  const Node& X = at(x);
  Node n;
  n.op = Op::kScaleConst;
  n.rows = X.rows;
  n.cols = X.cols;
  n.a = x;
  n.aux = c;
  n.val.resize(X.n());
  for (size_t i = 0; i < X.n(); ++i) n.val[i] = c * X.vp()[i];
  return push(std::move(n));
}

int Tape::add_const(int x, double c) {
  const Node& X = at(x);
  Node n;
  n.op = Op::kAddConst;
  n.rows = X.rows;
  n.cols = X.cols;
  n.a = x;
  n.aux = c;
  n.val.resize(X.n());
  for (size_t i = 0; i < X.n(); ++i) n.val[i] = X.vp()[i] + c;
  return push(std::move(n));
}

int Tape::sigmoid(int x) {
  const Node& X = at(x);
  Node n;
  n.op = Op::kSigmoid;
  n.rows = X.rows;
  n.cols = X.cols;
  n.a = x;
  n.val.resize(X.n());
  for (size_t i = 0; i < X.n(); ++i) n.val[i] = emdlot::sigmoid(X.vp()[i]);
  return push(std::move(n));
}

int Tape::tanh(int x) {
  const Node& X = at(x);
  Node n;
  n.op = Op::kTanh;
  n.rows = X.rows;
  n.cols = X.cols;
  n.a = x;
  n.val.resize(X.n());
  for (size_t i = 0; i < X.n(); ++i) n.val[i] = std::tanh(X.vp()[i]);
  return push(std::move(n));
}

int Tape::softmax_t(int x, double tau) {
  check_vec(x, "softmax_t");
  require(tau > 0.0, "softmax_t: tau must be positive");
  const Node& X = at(x);
  Node n;
  n.op = Op::kSoftmaxT;
  n.rows = X.rows;
  n.a = x;
  n.aux = tau;
  n.val = emdlot::softmax_t(std::span<const double>(X.vp(), X.n()), tau);
  return push(std::move(n));
}

int Tape::dot(int x, int y) {
  check_vec(x, "dot");
  check_vec(y, "dot");
  const Node& X = at(x);
  const Node& Y = at(y);
  require(X.n() == Y.n(), "dot: size mismatch");
  Node n;
  n.op = Op::kDot;
  n.rows = 1;
  n.a = x;
  n.b = y;
  double s = 0.0;
  for (size_t i = 0; i < X.n(); ++i) s += X.vp()[i] * Y.vp()[i];
  n.val.assign(1, s);
  return push(std::move(n));
}

int Tape::neg_log_pick(int x, size_t index) {
  check_vec(x, "neg_log_pick");
  const Node& X = at(x);
  require(index < X.n(), "neg_log_pick: index out of range");
  Node n;
  n.op = Op::kNegLogPick;
  n.rows = 1;
  n.a = x;
  n.index = index;
  n.val.assign(1, -std::log(std::max(X.vp()[index], kLogClamp)));
  return push(std::move(n));
}

int Tape::stack(std::span<const int> scalars) {
  require(!scalars.empty(), "stack: empty");
  Node n;
  n.op = Op::kStack;
  n.rows = scalars.size();
  n.many.assign(scalars.begin(), scalars.end());
  n.val.resize(scalars.size());
  for (size_t i = 0; i < scalars.size(); ++i) {
    require(at(scalars[i]).n() == 1, "stack: parents must be scalars");
    n.val[i] = at(scalars[i]).vp()[0];
  }
  return push(std::move(n));
}

int Tape::weighted_sum(int alpha, std::span<const int> vecs) {
  check_vec(alpha, "weighted_sum");
  require(at(alpha).n() == vecs.size(), "weighted_sum: weight/vector count mismatch");
  require(!vecs.empty(), "weighted_sum: empty");
  const size_t d = at(vecs[0]).n();
  Node n;
  n.op = Op::kWeightedSum;
  n.rows = d;
  n.a = alpha;
  n.many.assign(vecs.begin(), vecs.end());
  n.val.assign(d, 0.0);
  const double* w = at(alpha).vp();
  for (size_t k = 0; k < vecs.size(); ++k) {
    const Node& V = at(vecs[k]);
    require(V.n() == d, "weighted_sum: ragged vectors");
    for (size_t i = 0; i < d; ++i) n.val[i] += w[k] * V.vp()[i];
  }
  return push(std::move(n));
}

int Tape::weighted_sum_const(std::span<const int> vecs, std::span<const double> weights) {
  require(vecs.size() == weights.size() && !vecs.empty(), "weighted_sum_const: bad arity");
  const size_t d = at(vecs[0]).n();
  Node n;
  n.op = Op::kWeightedSumC;
  n.rows = d;
  n.many.assign(vecs.begin(), vecs.end());
  n.weights.assign(weights.begin(), weights.end());
  n.val.assign(d, 0.0);
  for (size_t k = 0; k < vecs.size(); ++k) {
    const Node& V = at(vecs[k]);
    require(V.n() == d, "weighted_sum_const: ragged vectors");
    for (size_t i = 0; i < d; ++i) n.val[i] += weights[k] * V.vp()[i];
  }
  return push(std::move(n));
}

int Tape::lin_comb(std::span<const int> scalars, std::span<const double> weights) {
  require(scalars.size() == weights.size() && !scalars.empty(), "lin_comb: bad arity");
  Node n;
  n.op = Op::kLinComb;
  n.rows = 1;
  n.many.assign(scalars.begin(), scalars.end());
  n.weights.assign(weights.begin(), weights.end());
  double s = 0.0;
  for (size_t k = 0; k < scalars.size(); ++k) {
    require(at(scalars[k]).n() == 1, "lin_comb: parents must be scalars");
    s += weights[k] * at(scalars[k]).vp()[0];
  }
  n.val.assign(1, s);
  return push(std::move(n));
}

int Tape::neg_entropy(int x) {
  check_vec(x, "neg_entropy");
  const Node& X = at(x);
  Node n;
  n.op = Op::kNegEntropy;
  n.rows = 1;
  n.a = x;
  double s = 0.0;
  for (size_t i = 0; i < X.n(); ++i) {
    double p = X.vp()[i];
    if (p >= kLogClamp) s += p * std::log(p);
  }
  n.val.assign(1, s);
  return push(std::move(n));
}

int Tape::sqrt(int s) {
  const Node& X = at(s);
  require(X.n() == 1, "sqrt: expected scalar");
  Node n;
  n.op = Op::kSqrtS;
  n.rows = 1;
  n.a = s;
  n.val.assign(1, std::sqrt(X.vp()[0]));
  return push(std::move(n));
}

int Tape::row_scale(int m, size_t row, double c) {
  const Node& M = at(m);
  require(row < M.rows, "row_scale: row out of range");
  Node n;
  n.op = Op::kRowScale;
  n.rows = M.cols;
  n.a = m;
  n.aux = c;
  n.index = row;
  n.val.resize(M.cols);
  const double* src = M.vp() + row * M.cols;
  for (size_t j = 0; j < M.cols; ++j) n.val[j] = c * src[j];
  return push(std::move(n));
}

double Tape::value(int node) const {
  const Node& n = at(node);
  return n.vp()[0];
}

std::span<const double> Tape::values(int node) const {
  const Node& n = at(node);
  return {n.vp(), n.n()};
}

size_t Tape::dim(int node) const { return at(node).n(); }

void Tape::backward(int root) {
  require(at(root).n() == 1, "backward: root must be scalar");
  for (auto& n : nodes_) n.grad.clear();
  auto grad_of = [&](int i) -> std::vector<double>& {
    Node& n = at(i);
    if (n.grad.empty()) n.grad.assign(n.n(), 0.0);
    return n.grad;
  };
  grad_of(root)[0] = 1.0;

  for (int i = root; i >= 0; --i) {
    Node& n = at(i);
    if (n.grad.empty()) continue;  // not on a path to the root
    const std::vector<double>& g = n.grad;
    switch (n.op) {
      case Op::kConst:
        break;
      case Op::kParam:
        if (n.ext_grad) {
          for (size_t k = 0; k < n.n(); ++k) n.ext_grad[k] += g[k];
        }
        break;
      case Op::kMatVec:
      case Op::kAffine: {
        Node& A = at(n.a);
        Node& X = at(n.b);
        auto& ga = grad_of(n.a);
        auto& gx = grad_of(n.b);
        const double* xp = X.vp();
        const double* ap = A.vp();
        for (size_t r = 0; r < A.rows; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          double* garow = ga.data() + r * A.cols;
          const double* arow = ap + r * A.cols;
          for (size_t c2 = 0; c2 < A.cols; ++c2) {
            garow[c2] += gr * xp[c2];
            gx[c2] += gr * arow[c2];
          }
        }
        if (n.op == Op::kAffine) {
          auto& gb = grad_of(n.c);
          for (size_t r = 0; r < n.n(); ++r) gb[r] += g[r];
        }
        break;
      }
      case Op::kAdd: {
        auto& gx = grad_of(n.a);
        auto& gy = grad_of(n.b);
        for (size_t k = 0; k < n.n(); ++k) {
          gx[k] += g[k];
          gy[k] += g[k];
        }
        break;
      }
      case Op::kSub: {
        auto& gx = grad_of(n.a);
        auto& gy = grad_of(n.b);
        for (size_t k = 0; k < n.n(); ++k) {
          gx[k] += g[k];
          gy[k] -= g[k];
        }
        break;
      }
      case Op::kHadamard: {
        Node& X = at(n.a);
        Node& Y = at(n.b);
        auto& gx = grad_of(n.a);
        auto& gy = grad_of(n.b);
        for (size_t k = 0; k < n.n(); ++k) {
          gx[k] += g[k] * Y.vp()[k];
          gy[k] += g[k] * X.vp()[k];
        }
        break;
      }
      case Op::kScaleConst: {
        auto& gx = grad_of(n.a);
        for (size_t k = 0; k < n.n(); ++k) gx[k] += g[k] * n.aux;
        break;
      }
      case Op::kAddConst: {
        auto& gx = grad_of(n.a);
        for (size_t k = 0; k < n.n(); ++k) gx[k] += g[k];
        break;
      }
      case Op::kSigmoid: {
        auto& gx = grad_of(n.a);
        for (size_t k = 0; k < n.n(); ++k) {
          const double s = n.val[k];
          gx[k] += g[k] * s * (1.0 - s);
        }
        break;
      }
      case Op::kTanh: {
        auto& gx = grad_of(n.a);
        for (size_t k = 0; k < n.n(); ++k) gx[k] += g[k] * (1.0 - n.val[k] * n.val[k]);
        break;
      }
      case Op::kSoftmaxT: {
        auto& gx = grad_of(n.a);
        double dot_gy = 0.0;
        for (size_t k = 0; k < n.n(); ++k) dot_gy += g[k] * n.val[k];
        const double inv_tau = 1.0 / n.aux;
        for (size_t k = 0; k < n.n(); ++k)
          gx[k] += inv_tau * n.val[k] * (g[k] - dot_gy);
        break;
      }
      case Op::kDot: {
        Node& X = at(n.a);
        Node& Y = at(n.b);
        auto& gx = grad_of(n.a);
        auto& gy = grad_of(n.b);
        const double gs = g[0];
        for (size_t k = 0; k < X.n(); ++k) {
          gx[k] += gs * Y.vp()[k];
          gy[k] += gs * X.vp()[k];
        }
        break;
      }
      case Op::kNegLogPick: {
        Node& X = at(n.a);
        auto& gx = grad_of(n.a);
        const double p = X.vp()[n.index];
        if (p >= kLogClamp) gx[n.index] += -g[0] / p;
        break;
      }
      case Op::kStack: {
        for (size_t k = 0; k < n.many.size(); ++k) grad_of(n.many[k])[0] += g[k];
        break;
      }
      case Op::kWeightedSum: {
        Node& A = at(n.a);
        auto& galpha = grad_of(n.a);
        const double* w = A.vp();
        for (size_t k = 0; k < n.many.size(); ++k) {
          Node& V = at(n.many[k]);
          auto& gv = grad_of(n.many[k]);
          double acc = 0.0;
          for (size_t j = 0; j < n.n(); ++j) {
            acc += g[j] * V.vp()[j];
            gv[j] += g[j] * w[k];
          }
          galpha[k] += acc;
        }
        break;
      }
      case Op::kWeightedSumC: {
        for (size_t k = 0; k < n.many.size(); ++k) {
          auto& gv = grad_of(n.many[k]);
          const double w = n.weights[k];
          for (size_t j = 0; j < n.n(); ++j) gv[j] += g[j] * w;
        }
        break;
      }
      case Op::kLinComb: {
        for (size_t k = 0; k < n.many.size(); ++k)
          grad_of(n.many[k])[0] += g[0] * n.weights[k];
        break;
      }
      case Op::kNegEntropy: {
        Node& X = at(n.a);
        auto& gx = grad_of(n.a);
        for (size_t k = 0; k < X.n(); ++k) {
          const double p = X.vp()[k];
          if (p >= kLogClamp) gx[k] += g[0] * (1.0 + std::log(p));
        }
        break;
      }
      case Op::kSqrtS: {
        auto& gx = grad_of(n.a);
        const double r = n.val[0];
        if (r > 0.0) gx[0] += g[0] * 0.5 / r;
        break;
      }
      case Op::kRowScale: {
        Node& M = at(n.a);
        auto& gm = grad_of(n.a);
        double* grow = gm.data() + n.index * M.cols;
        for (size_t j = 0; j < n.n(); ++j) grow[j] += g[j] * n.aux;
        break;
      }
    }
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace emdlot
