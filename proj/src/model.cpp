#include "spad/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "spad/training.hpp"

namespace spad {
namespace {

int argmax(const Tensor& t) {
  Eigen::Index idx = 0;
  t.value().maxCoeff(&idx);
  return static_cast<int>(idx);
}

std::vector<double> to_vector(const Tensor& t) {
  return std::vector<double>(t.value().data(), t.value().data() + t.size());
}

}  // namespace

Seq2SeqModel::Seq2SeqModel(ModelConfig config, ParameterSet params)
    : config_(std::move(config)), params_(std::move(params)) {}

Seq2SeqModel Seq2SeqModel::create(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.src_vocab < 1 || cfg.tgt_vocab < 1) {
    throw std::invalid_argument("Seq2SeqModel: vocabulary sizes must be set");
  }
  ParameterSet ps;
  auto init = [&](const std::string& name, Shape shape) {
    ps.create(name, std::move(shape), Rng(seed, "init/" + name));
  };

  register_encoder(ps, cfg.encoder(), cfg.src_vocab, seed);
  init("tgt_embed", {cfg.tgt_vocab, cfg.embed_dim});

  const int enc_dim = cfg.encoder_dim();
  init("dec/init/W", {cfg.hidden, enc_dim});
  init("dec/init/b", {cfg.hidden});
  for (int l = 0; l < cfg.dec_layers; ++l) {
    const int in_dim = l == 0 ? cfg.embed_dim + cfg.hidden : cfg.hidden;
    register_cell(ps, "dec/l" + std::to_string(l), cfg.cell_type(), in_dim, cfg.hidden, seed);
    if (cfg.residual && l > 0) {
      Tensor& gain = ps.create_zeros("dec/l" + std::to_string(l) + "/ln/gain", {cfg.hidden});
      gain.value().setConstant(1.0);
      ps.create_zeros("dec/l" + std::to_string(l) + "/ln/bias", {cfg.hidden});
    }
  }

  register_attention(ps, cfg.attention(), cfg.hidden, enc_dim, seed);
  register_combine(ps, cfg.hidden, enc_dim, seed);
  if (cfg.scratchpad) register_scratchpad(ps, cfg.hidden, enc_dim, enc_dim, cfg.hidden, seed);
  init("out/W", {cfg.tgt_vocab, cfg.hidden});
  init("out/b", {cfg.tgt_vocab});

  return Seq2SeqModel(cfg, std::move(ps));
}

std::vector<std::string> Seq2SeqModel::parameter_names(const ModelConfig& cfg) {
  return create(cfg, 0).params().names();
}

EncoderOutputs Seq2SeqModel::encode_source(const std::vector<int>& source, Rng* dropout_rng,
                                           bool training) const {
  return encode(source, params_, config_.encoder(), dropout_rng, training);
}

DecoderState Seq2SeqModel::initial_state(const EncoderOutputs& enc) const {
  Tensor seed_hidden = init_decoder_state(enc, params_);
  DecoderState state;
  state.layers.resize(static_cast<std::size_t>(config_.dec_layers));
  for (auto& layer : state.layers) {
    layer.hidden = seed_hidden;
    if (config_.cell_type() == CellType::Lstm) layer.cell = Tensor::zeros({config_.hidden});
  }
  state.attentional = Tensor::zeros({config_.hidden});
  state.step = 0;
  return state;
}

StepResult Seq2SeqModel::decode_step(const DecoderState& state, const ScratchpadMemory& memory,
                                     int prev_token, const std::vector<bool>* source_mask,
                                     const CoverageState* coverage, Rng* dropout_rng,
                                     bool training) const {
  // Input feeding: the previous attentional state joins the token embedding,
  // and the recurrent update runs before the attentive read.
  Tensor layer_input = concat({embedding_row(params_.at("tgt_embed"), prev_token),
                               state.attentional});
  StepResult result;
  result.state.layers.resize(state.layers.size());
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const std::string prefix = "dec/l" + std::to_string(l);
    if (l > 0 && config_.dropout > 0.0 && training && dropout_rng) {
      layer_input = dropout(layer_input, config_.dropout, *dropout_rng, training);
    }
    CellState next = cell_step(config_.cell_type(), layer_input, state.layers[l], params_, prefix);
    Tensor out = next.hidden;
    if (config_.residual && l > 0) {
      out = layer_norm(add(out, layer_input), params_.at(prefix + "/ln/gain"),
                       params_.at(prefix + "/ln/bias"));
    }
    result.state.layers[l] = next;
    layer_input = out;
  }
  Tensor top = layer_input;

  const Tensor* cov = coverage && config_.coverage ? &coverage->coverage : nullptr;
  result.attention = attend(top, memory, source_mask, config_.attention(), params_, cov);
  Tensor combined = combine(top, result.attention.context, params_);
  result.log_probs = log_softmax(affine(params_.at("out/W"), combined, params_.at("out/b")));

  if (config_.scratchpad && !config_.pin_gates) {
    auto [next_memory, record] = write(memory, combined, result.attention.context, params_);
    result.memory = std::move(next_memory);
    result.write_record = std::move(record);
  } else {
    result.memory = memory;
    if (config_.scratchpad) result.memory.version = memory.version + 1;
  }

  result.state.attentional = combined;
  result.state.step = state.step + 1;

  result.trace.attention = to_vector(result.attention.distribution);
  result.trace.log_probs = to_vector(result.log_probs);
  result.trace.fed_token = prev_token;
  result.trace.argmax_token = argmax(result.log_probs);
  if (result.write_record) {
    result.trace.update = to_vector(result.write_record->update);
    result.trace.gates.reserve(result.write_record->gates.size());
    for (const Tensor& g : result.write_record->gates) {
      result.trace.gates.push_back(g.item());
    }
  }
  return result;
}

ForwardResult Seq2SeqModel::forward_teacher_forced(const std::vector<int>& source,
                                                   const std::vector<int>& target,
                                                   Rng& sampling_rng, Rng* dropout_rng,
                                                   bool training, double teacher_forcing_p,
                                                   double label_smoothing,
                                                   double coverage_lambda) const {
  if (source.empty() || target.empty()) {
    throw std::invalid_argument("forward_teacher_forced: empty sequence");
  }
  EncoderOutputs enc = encode_source(source, dropout_rng, training);
  DecoderState state = initial_state(enc);
  ScratchpadMemory memory = ScratchpadMemory::from_encoder(enc.states);
  CoverageState cov = CoverageState::zeros(static_cast<int>(source.size()));

  std::vector<int> golds = target;
  golds.push_back(kEosId);

  ForwardResult result;
  Tensor ce_total;
  Tensor penalty_total;
  int prev = kBosId;
  for (std::size_t j = 0; j < golds.size(); ++j) {
    StepResult step = decode_step(state, memory, prev, nullptr,
                                  config_.coverage ? &cov : nullptr, dropout_rng, training);
    Tensor ce = label_smoothed_nll(step.log_probs, golds[j], label_smoothing);
    ce_total = ce_total.defined() ? add(ce_total, ce) : ce;
    if (config_.coverage) {
      Tensor pen = coverage_loss(cov, step.attention.distribution);
      penalty_total = penalty_total.defined() ? add(penalty_total, pen) : pen;
      cov = coverage_update(cov, step.attention.distribution);
    }
    result.traces.push_back(step.trace);
    state = std::move(step.state);
    memory = std::move(step.memory);
    prev = sampling_rng.bernoulli(teacher_forcing_p) ? golds[j] : step.trace.argmax_token;
  }
  const double inv_steps = 1.0 / static_cast<double>(golds.size());
  result.cross_entropy = scale(ce_total, inv_steps);
  result.loss = config_.coverage
                    ? add(result.cross_entropy,
                          scale(penalty_total, coverage_lambda * inv_steps))
                    : result.cross_entropy;
  if (!result.loss.all_finite()) {
    throw std::runtime_error("forward_teacher_forced: non-finite loss");
  }
  return result;
}

}  // namespace spad
