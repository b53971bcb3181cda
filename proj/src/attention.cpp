#include "spad/attention.hpp"

#include <stdexcept>

namespace spad {

ScoreFunction score_function_from_string(const std::string& s) {
  if (s == "general") return ScoreFunction::General;
  if (s == "mlp") return ScoreFunction::Mlp;
  throw std::invalid_argument("unknown score function: " + s);
}

std::string to_string(ScoreFunction f) {
  return f == ScoreFunction::General ? "general" : "mlp";
}

void register_attention(ParameterSet& ps, const AttentionConfig& cfg, int state_dim,
                        int memory_dim, std::uint64_t seed) {
  auto init = [&](const std::string& name, Shape shape) {
    ps.create(name, std::move(shape), Rng(seed, "init/" + name));
  };
  if (cfg.score == ScoreFunction::General) {
    init("attn/Wg", {state_dim, memory_dim});
  } else {
    init("attn/W2", {state_dim, state_dim + memory_dim});
    init("attn/W1", {1, state_dim});
  }
  if (cfg.coverage) init("attn/cov_w", {1});
}

std::vector<std::string> attention_param_names(const AttentionConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.score == ScoreFunction::General) {
    out.push_back("attn/Wg");
  } else {
    out.push_back("attn/W2");
    out.push_back("attn/W1");
  }
  if (cfg.coverage) out.push_back("attn/cov_w");
  return out;
}

Tensor score_mlp(const Tensor& state, const Tensor& memory_state, const ParameterSet& ps,
                 bool hidden_tanh) {
  Tensor inner = matvec(ps.at("attn/W2"), concat({state, memory_state}));
  if (hidden_tanh) inner = tanh(inner);
  return matvec(ps.at("attn/W1"), inner);
}

Tensor score_general(const Tensor& state, const Tensor& memory_state, const ParameterSet& ps) {
  return dot(state, matvec(ps.at("attn/Wg"), memory_state));
}

AttentionRecord attend(const Tensor& state, const ScratchpadMemory& memory,
                       const std::vector<bool>* mask, const AttentionConfig& cfg,
                       const ParameterSet& ps, const Tensor* coverage) {
  if (memory.states.empty()) throw std::invalid_argument("attend: empty memory");
  std::vector<Tensor> scores;
  scores.reserve(memory.states.size());
  for (std::size_t t = 0; t < memory.states.size(); ++t) {
    Tensor s = cfg.score == ScoreFunction::General
                   ? score_general(state, memory.states[t], ps)
                   : score_mlp(state, memory.states[t], ps, cfg.mlp_hidden_tanh);
    if (cfg.coverage && coverage) {
      s = add(s, mul(ps.at("attn/cov_w"), pick(*coverage, static_cast<long>(t))));
    }
    scores.push_back(s);
  }
  AttentionRecord record;
  record.scores = concat(scores);
  record.distribution = softmax(record.scores, mask);
  Tensor context = mul(pick(record.distribution, 0), memory.states[0]);
  for (std::size_t t = 1; t < memory.states.size(); ++t) {
    context = add(context,
                  mul(pick(record.distribution, static_cast<long>(t)), memory.states[t]));
  }
  record.context = context;
  return record;
}

void register_combine(ParameterSet& ps, int state_dim, int context_dim, std::uint64_t seed) {
  ps.create("comb/W", {state_dim, context_dim + state_dim}, Rng(seed, "init/comb/W"));
}

Tensor combine(const Tensor& state, const Tensor& context, const ParameterSet& ps) {
  return tanh(matvec(ps.at("comb/W"), concat({context, state})));
}

}  // namespace spad
