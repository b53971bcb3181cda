#pragma once

#include <vector>

#include "spad/model.hpp"

namespace spad {

struct DecodeResult {
  std::vector<int> tokens;  // output ids, end-of-sequence excluded
  std::vector<StepTrace> traces;
};

struct ScoredSequence {
  std::vector<int> tokens;
  double score;  // length-normalized log-probability
};

struct BeamResult {
  DecodeResult best;
  std::vector<ScoredSequence> nbest;  // scores non-increasing
};

// Argmax decoding until end-of-sequence or max_len steps.
DecodeResult greedy_decode(const Seq2SeqModel& model, const std::vector<int>& source,
                           int max_len);

// Standard beam search over per-step log-probabilities. Every hypothesis
// carries its own memory version chain (writes depend on the hypothesis's
// decoder state, so memories diverge per beam). Finished hypotheses are
// frozen, kept in the pool, and compete by log-prob divided by length.
BeamResult beam_decode(const Seq2SeqModel& model, const std::vector<int>& source, int beam,
                       int max_len);

}  // namespace spad
