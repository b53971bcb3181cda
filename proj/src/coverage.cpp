#include "spad/coverage.hpp"

#include <stdexcept>

namespace spad {

CoverageState coverage_update(const CoverageState& state, const Tensor& attention) {
  if (state.coverage.shape() != attention.shape()) {
    throw std::invalid_argument("coverage_update: length mismatch " +
                                shape_str(state.coverage.shape()) + " vs " +
                                shape_str(attention.shape()));
  }
  return CoverageState{add(state.coverage, attention)};
}

Tensor coverage_loss(const CoverageState& state, const Tensor& attention) {
  if (state.coverage.shape() != attention.shape()) {
    throw std::invalid_argument("coverage_loss: length mismatch");
  }
  return sum(minimum(state.coverage, attention));
}

}  // namespace spad
