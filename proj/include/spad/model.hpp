#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spad/attention.hpp"
#include "spad/cells.hpp"
#include "spad/coverage.hpp"
#include "spad/params.hpp"
#include "spad/scratchpad.hpp"

namespace spad {

// Reserved vocabulary ids, fixed across the toolkit.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;

struct ModelConfig {
  std::string cell = "gru";
  int embed_dim = 32;
  int hidden = 64;
  int enc_layers = 1;
  int dec_layers = 1;
  bool bidirectional = true;
  std::string score_function = "general";
  bool score_mlp_tanh = false;
  bool scratchpad = false;
  // Keep-gates forced to 1 (writes disabled); the scratchpad model then
  // reduces exactly to the vanilla attention baseline.
  bool pin_gates = false;
  bool coverage = false;
  bool residual = false;  // residual + layer norm on decoder layers above the first
  double dropout = 0.0;
  int src_vocab = 0;
  int tgt_vocab = 0;

  CellType cell_type() const { return cell_type_from_string(cell); }
  ScoreFunction score() const { return score_function_from_string(score_function); }
  AttentionConfig attention() const {
    return AttentionConfig{score(), score_mlp_tanh, coverage};
  }
  EncoderConfig encoder() const {
    return EncoderConfig{cell_type(), enc_layers, bidirectional, embed_dim, hidden, dropout};
  }
  int encoder_dim() const { return hidden * (bidirectional ? 2 : 1); }
};

struct DecoderState {
  std::vector<CellState> layers;
  Tensor attentional;  // combined state of the previous step (input-feed vector)
  int step = 0;
};

// Plain-value snapshot of one decode step, consumed by the analysis suite.
struct StepTrace {
  std::vector<double> attention;
  std::vector<double> gates;   // empty for non-scratchpad configs
  std::vector<double> update;  // empty for non-scratchpad configs
  std::vector<double> log_probs;
  int fed_token = 0;
  int argmax_token = 0;
};

struct StepResult {
  DecoderState state;
  ScratchpadMemory memory;
  Tensor log_probs;
  AttentionRecord attention;
  std::optional<WriteRecord> write_record;
  StepTrace trace;
};

struct ForwardResult {
  Tensor loss;            // training objective (includes coverage penalty if any)
  Tensor cross_entropy;   // label-smoothed CE alone
  std::vector<StepTrace> traces;
};

class Seq2SeqModel {
 public:
  Seq2SeqModel(ModelConfig config, ParameterSet params);

  static Seq2SeqModel create(const ModelConfig& config, std::uint64_t seed);
  // Expected canonical tensor names for this config.
  static std::vector<std::string> parameter_names(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  EncoderOutputs encode_source(const std::vector<int>& source, Rng* dropout_rng = nullptr,
                               bool training = false) const;
  DecoderState initial_state(const EncoderOutputs& enc) const;

  StepResult decode_step(const DecoderState& state, const ScratchpadMemory& memory,
                         int prev_token, const std::vector<bool>* source_mask = nullptr,
                         const CoverageState* coverage = nullptr, Rng* dropout_rng = nullptr,
                         bool training = false) const;

  // Runs the full decode over gold targets with per-step scheduled sampling.
  // Loss is the mean label-smoothed cross-entropy over target tokens (plus the
  // weighted coverage penalty when coverage is enabled).
  ForwardResult forward_teacher_forced(const std::vector<int>& source,
                                       const std::vector<int>& target, Rng& sampling_rng,
                                       Rng* dropout_rng, bool training,
                                       double teacher_forcing_p, double label_smoothing,
                                       double coverage_lambda = 1.0) const;

 private:
  ModelConfig config_;
  ParameterSet params_;
};

}  // namespace spad
