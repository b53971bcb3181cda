#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "spad/ops.hpp"
#include "spad/tensor.hpp"

namespace spad::testutil {

// Compares one reverse-mode pass against central finite differences over
// every element of `inputs`. `f` must be a pure function of the input values
// (shared payloads: perturbing inputs[k].value() changes what f sees).
// Returns the worst relative error.
inline double grad_check(const std::vector<Tensor>& inputs, const std::function<Tensor()>& f,
                         double h = 1e-5) {
  for (const Tensor& t : inputs) t.grad().setZero();
  {
    Tape tape;
    Tape::Scope scope(tape);
    tape.backward(f());
  }
  std::vector<Eigen::ArrayXd> analytic;
  analytic.reserve(inputs.size());
  for (const Tensor& t : inputs) analytic.push_back(t.grad());

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor input = inputs[k];  // shared payload, mutable handle
    for (long i = 0; i < input.size(); ++i) {
      const double orig = input.value()(i);
      input.value()(i) = orig + h;
      const double up = f().item();
      input.value()(i) = orig - h;
      const double down = f().item();
      input.value()(i) = orig;
      const double fd = (up - down) / (2.0 * h);
      const double g = analytic[k](i);
      const double denom = std::max({std::fabs(fd), std::fabs(g), 1e-4});
      worst = std::max(worst, std::fabs(g - fd) / denom);
    }
  }
  return worst;
}

inline Tensor random_tensor(Shape shape, Rng rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (long i = 0; i < t.size(); ++i) t.value()(i) = rng.uniform(lo, hi);
  return t;
}

}  // namespace spad::testutil
