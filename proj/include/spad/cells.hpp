#pragma once

#include <string>
#include <vector>

#include "spad/ops.hpp"
#include "spad/params.hpp"

namespace spad {

enum class CellType { Gru, Lstm };

CellType cell_type_from_string(const std::string& s);
std::string to_string(CellType t);

struct CellState {
  Tensor hidden;
  Tensor cell;  // LSTM only; undefined for GRU
};

struct EncoderOutputs {
  std::vector<Tensor> states;  // top-layer output per source position
  CellState final_forward;
  CellState final_backward;  // undefined for unidirectional encoders
  bool bidirectional = false;
};

struct EncoderConfig {
  CellType cell = CellType::Gru;
  int layers = 1;
  bool bidirectional = false;
  int embed_dim = 32;
  int hidden = 64;
  double dropout = 0.0;  // between stacked layers only
};

// Registers the weight matrices and biases for one cell under `prefix`.
void register_cell(ParameterSet& ps, const std::string& prefix, CellType type, int input_dim,
                   int hidden_dim, std::uint64_t seed);
std::vector<std::string> cell_param_names(const std::string& prefix, CellType type);

CellState gru_step(const Tensor& x, const CellState& prev, const ParameterSet& ps,
                   const std::string& prefix);

struct LstmGates {
  Tensor input;
  Tensor forget;
  Tensor output;
  Tensor candidate;
};

CellState lstm_step(const Tensor& x, const CellState& prev, const ParameterSet& ps,
                    const std::string& prefix, LstmGates* gates = nullptr);

CellState cell_step(CellType type, const Tensor& x, const CellState& prev,
                    const ParameterSet& ps, const std::string& prefix);

CellState initial_cell_state(CellType type, int hidden_dim);

// Registers embedding + all encoder layers under "src_embed" / "enc/...".
void register_encoder(ParameterSet& ps, const EncoderConfig& cfg, int vocab_size,
                      std::uint64_t seed);

// Stacked (optionally bidirectional) encoder over embedded source tokens.
// Per-position outputs of the two directions are combined by concatenation.
EncoderOutputs encode(const std::vector<int>& source, const ParameterSet& ps,
                      const EncoderConfig& cfg, Rng* dropout_rng = nullptr,
                      bool training = false);

// Encoder output width per position (2x hidden when bidirectional).
int encoder_output_dim(const EncoderConfig& cfg);

// Concat of final direction states -> affine -> tanh, projected to the
// decoder width. Used to seed every decoder layer.
Tensor init_decoder_state(const EncoderOutputs& enc, const ParameterSet& ps);

}  // namespace spad
