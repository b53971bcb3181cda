#pragma once

#include "spad/ops.hpp"

namespace spad {

// Running elementwise sum of past attention distributions. After k completed
// steps the entries total k.
struct CoverageState {
  Tensor coverage;

  static CoverageState zeros(int length) { return CoverageState{Tensor::zeros({length})}; }
};

// coverage' = coverage + a
CoverageState coverage_update(const CoverageState& state, const Tensor& attention);

// Per-step penalty sum_t min(coverage_t, a_t); nonnegative, zero on the first
// step. The caller weights it by lambda before adding it to the loss.
Tensor coverage_loss(const CoverageState& state, const Tensor& attention);

}  // namespace spad
