#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace spad {

using Shape = std::vector<int>;

inline long shape_numel(const Shape& s) {
  long n = 1;
  for (int d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

// Dense 64-bit tensor with value semantics over a shared payload. Rank 1 and 2
// cover everything the model needs; parameters are rank-2, activations rank-1.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int dim(int i) const { return impl_->shape[static_cast<std::size_t>(i)]; }
  long size() const { return impl_->value.size(); }

  Eigen::ArrayXd& value() { return impl_->value; }
  const Eigen::ArrayXd& value() const { return impl_->value; }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool rg) { impl_->requires_grad = rg; }

  bool has_grad() const { return impl_->grad.size() == impl_->value.size(); }
  // Allocates a zero gradient on first touch. Gradient state lives in the
  // shared payload, so it stays writable through const handles (pull
  // functions capture their operands by value).
  Eigen::ArrayXd& grad() const;
  void zero_grad();

  double item() const;
  double operator()(long i) const { return impl_->value(i); }

  bool same_payload(const Tensor& other) const { return impl_ == other.impl_; }
  bool all_finite() const { return impl_->value.allFinite(); }

 private:
  struct Impl {
    Shape shape;
    Eigen::ArrayXd value;
    Eigen::ArrayXd grad;  // size 0 until touched
    bool requires_grad = false;
  };

  std::shared_ptr<Impl> impl_;
};

// Ordered record of the primitive operations of one forward computation.
// Recording order is a topological order by construction; backward replays the
// pull functions once each, in reverse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::function<void()> pull) { pulls_.push_back(std::move(pull)); }
  std::size_t size() const { return pulls_.size(); }
  void clear() { pulls_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and propagates to every recorded input.
  // Repeated calls without clearing gradients accumulate.
  void backward(Tensor loss);

  static Tape* active();

  // RAII activation; ops record onto the innermost active tape.
  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

 private:
  std::vector<std::function<void()>> pulls_;
};

}  // namespace spad
