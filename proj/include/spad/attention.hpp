#pragma once

#include <string>
#include <vector>

#include "spad/ops.hpp"
#include "spad/params.hpp"
#include "spad/scratchpad.hpp"

namespace spad {

enum class ScoreFunction { General, Mlp };

ScoreFunction score_function_from_string(const std::string& s);
std::string to_string(ScoreFunction f);

struct AttentionConfig {
  ScoreFunction score = ScoreFunction::General;
  // Optional tanh between the two affine maps of the MLP score; off by
  // default, which keeps the composition linear.
  bool mlp_hidden_tanh = false;
  bool coverage = false;  // adds a learned per-position coverage term to the score
};

struct AttentionRecord {
  Tensor scores;        // one pre-softmax score per memory position
  Tensor distribution;  // probability vector over unmasked positions
  Tensor context;       // distribution-weighted sum of memory states
};

void register_attention(ParameterSet& ps, const AttentionConfig& cfg, int state_dim,
                        int memory_dim, std::uint64_t seed);
std::vector<std::string> attention_param_names(const AttentionConfig& cfg);

// W1(W2 [s; h]^T), optionally with a tanh between the maps.
Tensor score_mlp(const Tensor& state, const Tensor& memory_state, const ParameterSet& ps,
                 bool hidden_tanh = false);

// s^T W_g h
Tensor score_general(const Tensor& state, const Tensor& memory_state, const ParameterSet& ps);

// Scores every position, applies a masked softmax and forms the attentive
// read. `coverage`, when given, contributes w_cov * coverage_t to position t.
AttentionRecord attend(const Tensor& state, const ScratchpadMemory& memory,
                       const std::vector<bool>* mask, const AttentionConfig& cfg,
                       const ParameterSet& ps, const Tensor* coverage = nullptr);

void register_combine(ParameterSet& ps, int state_dim, int context_dim, std::uint64_t seed);

// Attentional combined state: tanh(W_c [c; s]).
Tensor combine(const Tensor& state, const Tensor& context, const ParameterSet& ps);

}  // namespace spad
