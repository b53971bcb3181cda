#include "spad/tensor.hpp"

namespace spad {

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->value = Eigen::ArrayXd::Zero(shape_numel(shape));
  t.impl_->shape = std::move(shape);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  t.value().setConstant(v);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != static_cast<long>(values.size())) {
    throw std::invalid_argument("Tensor::from: " + shape_str(shape) + " does not hold " +
                                std::to_string(values.size()) + " values");
  }
  Tensor t = zeros(std::move(shape), requires_grad);
  for (long i = 0; i < t.size(); ++i) t.value()(i) = values[static_cast<std::size_t>(i)];
  return t;
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  Shape shape{static_cast<int>(values.size())};
  return from(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

Eigen::ArrayXd& Tensor::grad() const {
  if (impl_->grad.size() != impl_->value.size()) {
    impl_->grad = Eigen::ArrayXd::Zero(impl_->value.size());
  }
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_->grad.size() == impl_->value.size()) impl_->grad.setZero();
}

double Tensor::item() const {
  if (size() != 1) {
    throw std::invalid_argument("Tensor::item: tensor has " + std::to_string(size()) +
                                " elements");
  }
  return impl_->value(0);
}

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

Tape* Tape::active() { return g_active_tape; }

Tape::Scope::Scope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

Tape::Scope::~Scope() { g_active_tape = previous_; }

void Tape::backward(Tensor loss) {
  if (loss.size() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be scalar, got " +
                                shape_str(loss.shape()));
  }
  loss.grad()(0) += 1.0;
  for (auto it = pulls_.rbegin(); it != pulls_.rend(); ++it) (*it)();
}

}  // namespace spad
