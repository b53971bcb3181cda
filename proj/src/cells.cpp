#include "spad/cells.hpp"

#include <stdexcept>

namespace spad {

CellType cell_type_from_string(const std::string& s) {
  if (s == "gru") return CellType::Gru;
  if (s == "lstm") return CellType::Lstm;
  throw std::invalid_argument("unknown cell type: " + s);
}

std::string to_string(CellType t) { return t == CellType::Gru ? "gru" : "lstm"; }

namespace {

const char* const kGruGates[] = {"z", "r", "n"};
const char* const kLstmGates[] = {"i", "f", "o", "g"};

Tensor& init_param(ParameterSet& ps, const std::string& name, Shape shape, std::uint64_t seed) {
  return ps.create(name, std::move(shape), Rng(seed, "init/" + name));
}

Tensor gate_preact(const Tensor& x, const Tensor& h, const ParameterSet& ps,
                   const std::string& prefix, const char* gate) {
  const Tensor& w = ps.at(prefix + "/W" + gate);
  const Tensor& u = ps.at(prefix + "/U" + gate);
  const Tensor& b = ps.at(prefix + "/b" + gate);
  return add(add(matvec(w, x), matvec(u, h)), b);
}

}  // namespace

void register_cell(ParameterSet& ps, const std::string& prefix, CellType type, int input_dim,
                   int hidden_dim, std::uint64_t seed) {
  const auto gates = type == CellType::Gru
                         ? std::vector<std::string>{kGruGates, kGruGates + 3}
                         : std::vector<std::string>{kLstmGates, kLstmGates + 4};
  for (const auto& g : gates) {
    init_param(ps, prefix + "/W" + g, {hidden_dim, input_dim}, seed);
    init_param(ps, prefix + "/U" + g, {hidden_dim, hidden_dim}, seed);
    init_param(ps, prefix + "/b" + g, {hidden_dim}, seed);
  }
}

std::vector<std::string> cell_param_names(const std::string& prefix, CellType type) {
  std::vector<std::string> out;
  const auto gates = type == CellType::Gru
                         ? std::vector<std::string>{kGruGates, kGruGates + 3}
                         : std::vector<std::string>{kLstmGates, kLstmGates + 4};
  for (const auto& g : gates) {
    out.push_back(prefix + "/W" + g);
    out.push_back(prefix + "/U" + g);
    out.push_back(prefix + "/b" + g);
  }
  return out;
}

CellState gru_step(const Tensor& x, const CellState& prev, const ParameterSet& ps,
                   const std::string& prefix) {
  Tensor z = sigmoid(gate_preact(x, prev.hidden, ps, prefix, "z"));
  Tensor r = sigmoid(gate_preact(x, prev.hidden, ps, prefix, "r"));
  Tensor gated_prev = mul(r, prev.hidden);
  Tensor n = tanh(add(add(matvec(ps.at(prefix + "/Wn"), x),
                          matvec(ps.at(prefix + "/Un"), gated_prev)),
                      ps.at(prefix + "/bn")));
  // h' = z*h + (1-z)*n
  Tensor hidden = add(mul(z, prev.hidden), mul(sub(Tensor::scalar(1.0), z), n));
  return CellState{hidden, Tensor{}};
}

CellState lstm_step(const Tensor& x, const CellState& prev, const ParameterSet& ps,
                    const std::string& prefix, LstmGates* gates) {
  Tensor i = sigmoid(gate_preact(x, prev.hidden, ps, prefix, "i"));
  Tensor f = sigmoid(gate_preact(x, prev.hidden, ps, prefix, "f"));
  Tensor o = sigmoid(gate_preact(x, prev.hidden, ps, prefix, "o"));
  Tensor g = tanh(gate_preact(x, prev.hidden, ps, prefix, "g"));
  Tensor cell = add(mul(f, prev.cell), mul(i, g));
  Tensor hidden = mul(o, tanh(cell));
  if (gates) *gates = LstmGates{i, f, o, g};
  return CellState{hidden, cell};
}

CellState cell_step(CellType type, const Tensor& x, const CellState& prev,
                    const ParameterSet& ps, const std::string& prefix) {
  return type == CellType::Gru ? gru_step(x, prev, ps, prefix)
                               : lstm_step(x, prev, ps, prefix);
}

CellState initial_cell_state(CellType type, int hidden_dim) {
  CellState s;
  s.hidden = Tensor::zeros({hidden_dim});
  if (type == CellType::Lstm) s.cell = Tensor::zeros({hidden_dim});
  return s;
}

void register_encoder(ParameterSet& ps, const EncoderConfig& cfg, int vocab_size,
                      std::uint64_t seed) {
  init_param(ps, "src_embed", {vocab_size, cfg.embed_dim}, seed);
  for (int l = 0; l < cfg.layers; ++l) {
    const int in_dim = l == 0 ? cfg.embed_dim : cfg.hidden * (cfg.bidirectional ? 2 : 1);
    register_cell(ps, "enc/l" + std::to_string(l) + "/fwd", cfg.cell, in_dim, cfg.hidden, seed);
    if (cfg.bidirectional) {
      register_cell(ps, "enc/l" + std::to_string(l) + "/bwd", cfg.cell, in_dim, cfg.hidden,
                    seed);
    }
  }
}

int encoder_output_dim(const EncoderConfig& cfg) {
  return cfg.hidden * (cfg.bidirectional ? 2 : 1);
}

EncoderOutputs encode(const std::vector<int>& source, const ParameterSet& ps,
                      const EncoderConfig& cfg, Rng* dropout_rng, bool training) {
  if (source.empty()) throw std::invalid_argument("encode: empty source");
  const long n = static_cast<long>(source.size());
  std::vector<Tensor> layer_inputs;
  layer_inputs.reserve(source.size());
  for (int id : source) layer_inputs.push_back(embedding_row(ps.at("src_embed"), id));

  EncoderOutputs out;
  out.bidirectional = cfg.bidirectional;
  for (int l = 0; l < cfg.layers; ++l) {
    const std::string prefix = "enc/l" + std::to_string(l);
    if (l > 0 && cfg.dropout > 0.0 && training && dropout_rng) {
      for (auto& t : layer_inputs) t = dropout(t, cfg.dropout, *dropout_rng, training);
    }
    std::vector<Tensor> fwd(source.size());
    CellState state = initial_cell_state(cfg.cell, cfg.hidden);
    for (long t = 0; t < n; ++t) {
      state = cell_step(cfg.cell, layer_inputs[static_cast<std::size_t>(t)], state, ps,
                        prefix + "/fwd");
      fwd[static_cast<std::size_t>(t)] = state.hidden;
    }
    out.final_forward = state;
    if (cfg.bidirectional) {
      std::vector<Tensor> bwd(source.size());
      CellState bstate = initial_cell_state(cfg.cell, cfg.hidden);
      for (long t = n - 1; t >= 0; --t) {
        bstate = cell_step(cfg.cell, layer_inputs[static_cast<std::size_t>(t)], bstate, ps,
                           prefix + "/bwd");
        bwd[static_cast<std::size_t>(t)] = bstate.hidden;
      }
      out.final_backward = bstate;
      for (long t = 0; t < n; ++t) {
        layer_inputs[static_cast<std::size_t>(t)] =
            concat({fwd[static_cast<std::size_t>(t)], bwd[static_cast<std::size_t>(t)]});
      }
    } else {
      layer_inputs = fwd;
    }
  }
  out.states = std::move(layer_inputs);
  return out;
}

Tensor init_decoder_state(const EncoderOutputs& enc, const ParameterSet& ps) {
  Tensor finals = enc.bidirectional
                      ? concat({enc.final_forward.hidden, enc.final_backward.hidden})
                      : enc.final_forward.hidden;
  return tanh(affine(ps.at("dec/init/W"), finals, ps.at("dec/init/b")));
}

}  // namespace spad
