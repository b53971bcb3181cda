#pragma once

#include <vector>

#include "spad/rng.hpp"
#include "spad/tensor.hpp"

namespace spad {

// Elementwise binary ops accept equal shapes or a scalar ({1}) on either side.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// [m,k] x [k] -> [m]
Tensor matvec(const Tensor& w, const Tensor& x);

// Rank-1 concatenation along axis 0.
Tensor concat(const std::vector<Tensor>& parts);

// Gathers rows of a [V,d] table; gradient scatter-adds (repeated ids accumulate).
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);
Tensor embedding_row(const Tensor& table, int id);

// Normalizes a rank-1 vector to zero mean / unit variance (denominator d,
// epsilon inside the root) and applies an elementwise gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double epsilon = 1e-5);

// Inverted dropout: zeroes with probability p and scales survivors by
// 1/(1-p); identity when not training.
Tensor dropout(const Tensor& x, double p, Rng& rng, bool training);

// Max-stabilized softmax over a rank-1 vector. Masked entries get exactly 0.
Tensor softmax(const Tensor& x, const std::vector<bool>* mask = nullptr);
Tensor log_softmax(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor pick(const Tensor& x, long index);
Tensor dot(const Tensor& a, const Tensor& b);

// Affine map of a rank-1 input: W x + b.
Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b);

// Seeds the scalar loss with gradient 1 and replays the active tape.
void backward(const Tensor& loss);

}  // namespace spad
