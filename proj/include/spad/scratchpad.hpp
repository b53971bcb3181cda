#pragma once

#include <utility>
#include <vector>

#include "spad/ops.hpp"
#include "spad/params.hpp"

namespace spad {

// Encoder output states reinterpreted as a writable external memory. Versions
// are functional: a write produces a new set of tensors, so backpropagation
// through time over the version chain is exact.
struct ScratchpadMemory {
  std::vector<Tensor> states;  // one [d_enc] state per source position
  int version = 0;

  static ScratchpadMemory from_encoder(std::vector<Tensor> encoder_states) {
    return ScratchpadMemory{std::move(encoder_states), 0};
  }
};

struct WriteRecord {
  std::vector<Tensor> gates;  // scalar keep-gate per position, in (0,1)
  Tensor update;              // shared update vector, in [-1,1]^d
};

void register_scratchpad(ParameterSet& ps, int state_dim, int context_dim, int memory_dim,
                         int mlp_hidden, std::uint64_t seed);
std::vector<std::string> scratchpad_param_names();

// tanh(f_u([s; c])): one update vector shared by all memory positions.
Tensor compute_update(const Tensor& state, const Tensor& context, const ParameterSet& ps);

// sigmoid(f_alpha([s; c; h_t])): scalar keep-gate for one memory position.
Tensor compute_gate(const Tensor& state, const Tensor& context, const Tensor& memory_state,
                    const ParameterSet& ps);

// h'_t = gate_t * h_t + (1 - gate_t) * u for every position; bumps the version.
std::pair<ScratchpadMemory, WriteRecord> write(const ScratchpadMemory& memory,
                                               const Tensor& state, const Tensor& context,
                                               const ParameterSet& ps);

}  // namespace spad
