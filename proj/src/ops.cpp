#include "spad/ops.hpp"

#include <cmath>

namespace spad {
namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMajorMatrix>;
using ConstMatMap = Eigen::Map<const RowMajorMatrix>;

ConstMatMap as_matrix(const Tensor& t) {
  return ConstMatMap(t.value().data(), t.dim(0), t.dim(1));
}

void record_if_tracked(const Tensor& out, std::function<void()> pull) {
  if (out.requires_grad() && Tape::active()) Tape::active()->record(std::move(pull));
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              shape_str(a.shape()) + " and " + shape_str(b.shape()));
}

bool is_scalar(const Tensor& t) { return t.size() == 1; }

enum class Broadcast { None, Left, Right };

Broadcast binary_mode(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Broadcast::None;
  if (is_scalar(a)) return Broadcast::Left;
  if (is_scalar(b)) return Broadcast::Right;
  shape_error(op, a, b);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  Broadcast bc = binary_mode("add", a, b);
  Tensor out = Tensor::zeros(bc == Broadcast::Left ? b.shape() : a.shape(),
                             a.requires_grad() || b.requires_grad());
  switch (bc) {
    case Broadcast::None: out.value() = a.value() + b.value(); break;
    case Broadcast::Left: out.value() = a.item() + b.value(); break;
    case Broadcast::Right: out.value() = a.value() + b.item(); break;
  }
  record_if_tracked(out, [a, b, out, bc]() mutable {
    if (a.requires_grad()) {
      if (bc == Broadcast::Left) a.grad()(0) += out.grad().sum();
      else a.grad() += out.grad();
    }
    if (b.requires_grad()) {
      if (bc == Broadcast::Right) b.grad()(0) += out.grad().sum();
      else b.grad() += out.grad();
    }
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  Broadcast bc = binary_mode("sub", a, b);
  Tensor out = Tensor::zeros(bc == Broadcast::Left ? b.shape() : a.shape(),
                             a.requires_grad() || b.requires_grad());
  switch (bc) {
    case Broadcast::None: out.value() = a.value() - b.value(); break;
    case Broadcast::Left: out.value() = a.item() - b.value(); break;
    case Broadcast::Right: out.value() = a.value() - b.item(); break;
  }
  record_if_tracked(out, [a, b, out, bc]() mutable {
    if (a.requires_grad()) {
      if (bc == Broadcast::Left) a.grad()(0) += out.grad().sum();
      else a.grad() += out.grad();
    }
    if (b.requires_grad()) {
      if (bc == Broadcast::Right) b.grad()(0) -= out.grad().sum();
      else b.grad() -= out.grad();
    }
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  Broadcast bc = binary_mode("mul", a, b);
  Tensor out = Tensor::zeros(bc == Broadcast::Left ? b.shape() : a.shape(),
                             a.requires_grad() || b.requires_grad());
  switch (bc) {
    case Broadcast::None: out.value() = a.value() * b.value(); break;
    case Broadcast::Left: out.value() = a.item() * b.value(); break;
    case Broadcast::Right: out.value() = a.value() * b.item(); break;
  }
  record_if_tracked(out, [a, b, out, bc]() mutable {
    if (a.requires_grad()) {
      switch (bc) {
        case Broadcast::None: a.grad() += out.grad() * b.value(); break;
        case Broadcast::Left: a.grad()(0) += (out.grad() * b.value()).sum(); break;
        case Broadcast::Right: a.grad() += out.grad() * b.item(); break;
      }
    }
    if (b.requires_grad()) {
      switch (bc) {
        case Broadcast::None: b.grad() += out.grad() * a.value(); break;
        case Broadcast::Left: b.grad() += out.grad() * a.item(); break;
        case Broadcast::Right: b.grad()(0) += (out.grad() * a.value()).sum(); break;
      }
    }
  });
  return out;
}

Tensor minimum(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("minimum", a, b);
  Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
  out.value() = a.value().min(b.value());
  record_if_tracked(out, [a, b, out]() mutable {
    // Ties route to a.
    for (long i = 0; i < out.size(); ++i) {
      if (a.value()(i) <= b.value()(i)) {
        if (a.requires_grad()) a.grad()(i) += out.grad()(i);
      } else if (b.requires_grad()) {
        b.grad()(i) += out.grad()(i);
      }
    }
  });
  return out;
}

Tensor scale(const Tensor& x, double c) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  out.value() = x.value() * c;
  record_if_tracked(out, [x, out, c]() mutable { x.grad() += out.grad() * c; });
  return out;
}

Tensor add_scalar(const Tensor& x, double c) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  out.value() = x.value() + c;
  record_if_tracked(out, [x, out]() mutable { x.grad() += out.grad(); });
  return out;
}

Tensor tanh(const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  out.value() = x.value().tanh();
  record_if_tracked(out, [x, out]() mutable {
    x.grad() += out.grad() * (1.0 - out.value().square());
  });
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  out.value() = 0.5 * (0.5 * x.value()).tanh() + 0.5;  // stable for large |x|
  record_if_tracked(out, [x, out]() mutable {
    x.grad() += out.grad() * out.value() * (1.0 - out.value());
  });
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) shape_error("matmul", a, b);
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::zeros({m, n}, a.requires_grad() || b.requires_grad());
  MatMap(out.value().data(), m, n) = as_matrix(a) * as_matrix(b);
  record_if_tracked(out, [a, b, out, m, k, n]() mutable {
    ConstMatMap dc(out.grad().data(), m, n);
    if (a.requires_grad()) MatMap(a.grad().data(), m, k) += dc * as_matrix(b).transpose();
    if (b.requires_grad()) MatMap(b.grad().data(), k, n) += as_matrix(a).transpose() * dc;
  });
  return out;
}

Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2 || x.rank() != 1 || w.dim(1) != x.dim(0)) shape_error("matvec", w, x);
  const int m = w.dim(0), k = w.dim(1);
  Tensor out = Tensor::zeros({m}, w.requires_grad() || x.requires_grad());
  out.value().matrix() = as_matrix(w) * x.value().matrix();
  record_if_tracked(out, [w, x, out, m, k]() mutable {
    if (w.requires_grad()) {
      MatMap(w.grad().data(), m, k).noalias() +=
          out.grad().matrix() * x.value().matrix().transpose();
    }
    if (x.requires_grad()) {
      x.grad().matrix().noalias() += as_matrix(w).transpose() * out.grad().matrix();
    }
  });
  return out;
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no parts");
  long total = 0;
  bool rg = false;
  for (const Tensor& p : parts) {
    if (p.rank() != 1) {
      throw std::invalid_argument("concat: expected rank-1 part, got " + shape_str(p.shape()));
    }
    total += p.size();
    rg = rg || p.requires_grad();
  }
  Tensor out = Tensor::zeros({static_cast<int>(total)}, rg);
  long offset = 0;
  for (const Tensor& p : parts) {
    out.value().segment(offset, p.size()) = p.value();
    offset += p.size();
  }
  record_if_tracked(out, [parts, out]() mutable {
    long off = 0;
    for (Tensor& p : const_cast<std::vector<Tensor>&>(parts)) {
      if (p.requires_grad()) p.grad() += out.grad().segment(off, p.size());
      off += p.size();
    }
  });
  return out;
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
  if (table.rank() != 2) {
    throw std::invalid_argument("embedding_lookup: table must be rank-2");
  }
  const int v = table.dim(0), d = table.dim(1);
  for (int id : ids) {
    if (id < 0 || id >= v) {
      throw std::out_of_range("embedding_lookup: id " + std::to_string(id) +
                              " outside vocabulary of size " + std::to_string(v));
    }
  }
  Tensor out = Tensor::zeros({static_cast<int>(ids.size()), d}, table.requires_grad());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    out.value().segment(static_cast<long>(r) * d, d) =
        table.value().segment(static_cast<long>(ids[r]) * d, d);
  }
  record_if_tracked(out, [table, out, ids, d]() mutable {
    for (std::size_t r = 0; r < ids.size(); ++r) {
      table.grad().segment(static_cast<long>(ids[r]) * d, d) +=
          out.grad().segment(static_cast<long>(r) * d, d);
    }
  });
  return out;
}

Tensor embedding_row(const Tensor& table, int id) {
  if (table.rank() != 2) throw std::invalid_argument("embedding_row: table must be rank-2");
  const int v = table.dim(0), d = table.dim(1);
  if (id < 0 || id >= v) {
    throw std::out_of_range("embedding_row: id " + std::to_string(id) +
                            " outside vocabulary of size " + std::to_string(v));
  }
  Tensor out = Tensor::zeros({d}, table.requires_grad());
  out.value() = table.value().segment(static_cast<long>(id) * d, d);
  record_if_tracked(out, [table, out, id, d]() mutable {
    table.grad().segment(static_cast<long>(id) * d, d) += out.grad();
  });
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double epsilon) {
  if (x.rank() != 1 || x.shape() != gain.shape() || x.shape() != bias.shape()) {
    throw std::invalid_argument("layer_norm: shapes " + shape_str(x.shape()) + ", " +
                                shape_str(gain.shape()) + ", " + shape_str(bias.shape()));
  }
  const double n = static_cast<double>(x.size());
  const double mu = x.value().mean();
  const double var = (x.value() - mu).square().sum() / n;
  const double inv_std = 1.0 / std::sqrt(var + epsilon);
  Eigen::ArrayXd normalized = (x.value() - mu) * inv_std;
  Tensor out = Tensor::zeros(x.shape(),
                             x.requires_grad() || gain.requires_grad() || bias.requires_grad());
  out.value() = gain.value() * normalized + bias.value();
  record_if_tracked(out, [x, gain, bias, out, normalized, inv_std, n]() mutable {
    if (bias.requires_grad()) bias.grad() += out.grad();
    if (gain.requires_grad()) gain.grad() += out.grad() * normalized;
    if (x.requires_grad()) {
      Eigen::ArrayXd g = gain.value() * out.grad();
      const double g_mean = g.mean();
      const double gy_mean = (g * normalized).mean();
      x.grad() += (g - g_mean - normalized * gy_mean) * inv_std;
    }
    (void)n;
  });
  return out;
}

Tensor dropout(const Tensor& x, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) {
    throw std::invalid_argument("dropout: p must be in [0,1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) return x;
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  Eigen::ArrayXd mask(x.size());
  const double keep_scale = 1.0 / (1.0 - p);
  for (long i = 0; i < x.size(); ++i) mask(i) = rng.bernoulli(p) ? 0.0 : keep_scale;
  out.value() = x.value() * mask;
  record_if_tracked(out, [x, out, mask]() mutable { x.grad() += out.grad() * mask; });
  return out;
}

Tensor softmax(const Tensor& x, const std::vector<bool>* mask) {
  if (x.rank() != 1 || x.size() < 1) {
    throw std::invalid_argument("softmax: expects a nonempty rank-1 tensor");
  }
  if (mask && static_cast<long>(mask->size()) != x.size()) {
    throw std::invalid_argument("softmax: mask length mismatch");
  }
  double max_score = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < x.size(); ++i) {
    if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
    max_score = std::max(max_score, x.value()(i));
  }
  if (!std::isfinite(max_score)) throw std::invalid_argument("softmax: all entries masked");
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  double denom = 0.0;
  for (long i = 0; i < x.size(); ++i) {
    if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
    out.value()(i) = std::exp(x.value()(i) - max_score);
    denom += out.value()(i);
  }
  out.value() /= denom;
  std::vector<bool> mask_copy = mask ? *mask : std::vector<bool>();
  record_if_tracked(out, [x, out, mask_copy]() mutable {
    double inner = 0.0;
    for (long i = 0; i < out.size(); ++i) inner += out.value()(i) * out.grad()(i);
    for (long i = 0; i < out.size(); ++i) {
      if (!mask_copy.empty() && !mask_copy[static_cast<std::size_t>(i)]) continue;
      x.grad()(i) += out.value()(i) * (out.grad()(i) - inner);
    }
  });
  return out;
}

Tensor log_softmax(const Tensor& x) {
  if (x.rank() != 1 || x.size() < 1) {
    throw std::invalid_argument("log_softmax: expects a nonempty rank-1 tensor");
  }
  const double max_score = x.value().maxCoeff();
  const double log_denom = std::log((x.value() - max_score).exp().sum()) + max_score;
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  out.value() = x.value() - log_denom;
  record_if_tracked(out, [x, out]() mutable {
    const double total = out.grad().sum();
    x.grad() += out.grad() - out.value().exp() * total;
  });
  return out;
}

Tensor sum(const Tensor& x) {
  Tensor out = Tensor::zeros({1}, x.requires_grad());
  out.value()(0) = x.value().sum();
  record_if_tracked(out, [x, out]() mutable { x.grad() += out.grad()(0); });
  return out;
}

Tensor mean(const Tensor& x) {
  Tensor out = Tensor::zeros({1}, x.requires_grad());
  out.value()(0) = x.value().mean();
  record_if_tracked(out, [x, out]() mutable {
    x.grad() += out.grad()(0) / static_cast<double>(x.size());
  });
  return out;
}

Tensor pick(const Tensor& x, long index) {
  if (index < 0 || index >= x.size()) {
    throw std::out_of_range("pick: index " + std::to_string(index) + " out of " +
                            std::to_string(x.size()));
  }
  Tensor out = Tensor::zeros({1}, x.requires_grad());
  out.value()(0) = x.value()(index);
  record_if_tracked(out, [x, out, index]() mutable { x.grad()(index) += out.grad()(0); });
  return out;
}

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b) {
  return add(matvec(w, x), b);
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (!tape) throw std::logic_error("backward: no active tape");
  tape->backward(loss);
}

}  // namespace spad
