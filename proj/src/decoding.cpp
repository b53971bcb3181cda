#include "spad/decoding.hpp"

#include <algorithm>
#include <stdexcept>

namespace spad {
namespace {

struct Hypothesis {
  std::vector<int> tokens;
  double raw_log_prob = 0.0;
  int steps = 0;  // emissions so far, end-of-sequence included
  DecoderState state;
  ScratchpadMemory memory;
  CoverageState coverage;
  std::vector<StepTrace> traces;
  bool finished = false;

  double normalized() const {
    return steps == 0 ? 0.0 : raw_log_prob / static_cast<double>(steps);
  }
};

}  // namespace

DecodeResult greedy_decode(const Seq2SeqModel& model, const std::vector<int>& source,
                           int max_len) {
  if (max_len < 1) throw std::invalid_argument("greedy_decode: max_len must be >= 1");
  EncoderOutputs enc = model.encode_source(source);
  DecoderState state = model.initial_state(enc);
  ScratchpadMemory memory = ScratchpadMemory::from_encoder(enc.states);
  CoverageState cov = CoverageState::zeros(static_cast<int>(source.size()));
  const bool use_cov = model.config().coverage;

  DecodeResult result;
  int prev = kBosId;
  for (int i = 0; i < max_len; ++i) {
    StepResult step = model.decode_step(state, memory, prev, nullptr,
                                        use_cov ? &cov : nullptr);
    result.traces.push_back(step.trace);
    if (use_cov) cov = coverage_update(cov, step.attention.distribution);
    const int next = step.trace.argmax_token;
    state = std::move(step.state);
    memory = std::move(step.memory);
    if (next == kEosId) break;
    result.tokens.push_back(next);
    prev = next;
  }
  return result;
}

BeamResult beam_decode(const Seq2SeqModel& model, const std::vector<int>& source, int beam,
                       int max_len) {
  if (beam < 1) throw std::invalid_argument("beam_decode: beam must be >= 1");
  if (max_len < 1) throw std::invalid_argument("beam_decode: max_len must be >= 1");
  EncoderOutputs enc = model.encode_source(source);
  const bool use_cov = model.config().coverage;

  Hypothesis root;
  root.state = model.initial_state(enc);
  root.memory = ScratchpadMemory::from_encoder(enc.states);
  root.coverage = CoverageState::zeros(static_cast<int>(source.size()));

  std::vector<Hypothesis> active{std::move(root)};
  std::vector<Hypothesis> finished;

  for (int i = 0; i < max_len && !active.empty(); ++i) {
    std::vector<Hypothesis> candidates;
    candidates.reserve(active.size() * static_cast<std::size_t>(model.config().tgt_vocab));
    for (const Hypothesis& hyp : active) {
      const int prev = hyp.tokens.empty() ? kBosId : hyp.tokens.back();
      StepResult step = model.decode_step(hyp.state, hyp.memory, prev, nullptr,
                                          use_cov ? &hyp.coverage : nullptr);
      for (int v = 0; v < model.config().tgt_vocab; ++v) {
        Hypothesis next = hyp;
        next.raw_log_prob += step.log_probs(v);
        next.steps += 1;
        next.traces.push_back(step.trace);
        if (v != kEosId) {
          next.tokens.push_back(v);
          next.state = step.state;
          next.memory = step.memory;
          if (use_cov) {
            next.coverage = coverage_update(hyp.coverage, step.attention.distribution);
          }
        }
        next.finished = v == kEosId;
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hypothesis& a, const Hypothesis& b) {
                       return a.raw_log_prob > b.raw_log_prob;
                     });
    if (static_cast<int>(candidates.size()) > beam) {
      candidates.resize(static_cast<std::size_t>(beam));
    }
    active.clear();
    for (Hypothesis& c : candidates) {
      if (c.finished) {
        finished.push_back(std::move(c));
      } else {
        active.push_back(std::move(c));
      }
    }
  }
  // Hypotheses still open at max_len compete as truncated outputs.
  for (Hypothesis& h : active) finished.push_back(std::move(h));
  if (finished.empty()) throw std::logic_error("beam_decode: no hypotheses produced");

  std::stable_sort(finished.begin(), finished.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     return a.normalized() > b.normalized();
                   });

  BeamResult result;
  result.best.tokens = finished.front().tokens;
  result.best.traces = finished.front().traces;
  const std::size_t n = std::min<std::size_t>(finished.size(), static_cast<std::size_t>(beam));
  for (std::size_t i = 0; i < n; ++i) {
    result.nbest.push_back(ScoredSequence{finished[i].tokens, finished[i].normalized()});
  }
  return result;
}

}  // namespace spad
