#include "spad/scratchpad.hpp"

namespace spad {
namespace {

Tensor mlp(const Tensor& input, const ParameterSet& ps, const std::string& prefix) {
  Tensor hidden = tanh(affine(ps.at(prefix + "/W1"), input, ps.at(prefix + "/b1")));
  return affine(ps.at(prefix + "/W2"), hidden, ps.at(prefix + "/b2"));
}

}  // namespace

void register_scratchpad(ParameterSet& ps, int state_dim, int context_dim, int memory_dim,
                         int mlp_hidden, std::uint64_t seed) {
  auto init = [&](const std::string& name, Shape shape) {
    ps.create(name, std::move(shape), Rng(seed, "init/" + name));
  };
  init("write/gate/W1", {mlp_hidden, state_dim + context_dim + memory_dim});
  init("write/gate/b1", {mlp_hidden});
  init("write/gate/W2", {1, mlp_hidden});
  init("write/gate/b2", {1});
  init("write/upd/W1", {mlp_hidden, state_dim + context_dim});
  init("write/upd/b1", {mlp_hidden});
  init("write/upd/W2", {memory_dim, mlp_hidden});
  init("write/upd/b2", {memory_dim});
}

std::vector<std::string> scratchpad_param_names() {
  return {"write/gate/W1", "write/gate/b1", "write/gate/W2", "write/gate/b2",
          "write/upd/W1",  "write/upd/b1",  "write/upd/W2",  "write/upd/b2"};
}

Tensor compute_update(const Tensor& state, const Tensor& context, const ParameterSet& ps) {
  return tanh(mlp(concat({state, context}), ps, "write/upd"));
}

Tensor compute_gate(const Tensor& state, const Tensor& context, const Tensor& memory_state,
                    const ParameterSet& ps) {
  return sigmoid(mlp(concat({state, context, memory_state}), ps, "write/gate"));
}

std::pair<ScratchpadMemory, WriteRecord> write(const ScratchpadMemory& memory,
                                               const Tensor& state, const Tensor& context,
                                               const ParameterSet& ps) {
  Tensor update = compute_update(state, context, ps);
  ScratchpadMemory next;
  next.version = memory.version + 1;
  next.states.reserve(memory.states.size());
  WriteRecord record;
  record.update = update;
  record.gates.reserve(memory.states.size());
  for (const Tensor& h : memory.states) {
    Tensor gate = compute_gate(state, context, h, ps);
    // Convex combination keeps each component between the old state and the
    // update, so memory stays inside [-1,1] at every version.
    Tensor kept = mul(gate, h);
    Tensor overwritten = mul(sub(Tensor::scalar(1.0), gate), update);
    next.states.push_back(add(kept, overwritten));
    record.gates.push_back(gate);
  }
  return {std::move(next), std::move(record)};
}

}  // namespace spad
