#pragma once

#include <string>
#include <vector>

#include "spad/model.hpp"

namespace spad {

struct EntropyStats {
  std::vector<double> entropies;  // per decode step, in trace order
  std::vector<double> sorted;     // same values ascending, for CDF emission
  double mean = 0.0;
};

struct CdfRow {
  double value;
  double cum_fraction;
};

// Natural-log Shannon entropy with 0*log(0) := 0. The input must sum to 1
// within 1e-6.
double attention_entropy(const std::vector<double>& distribution);

// Entropy of every step's attention distribution across a set of traces.
EntropyStats entropy_report(const std::vector<std::vector<StepTrace>>& traces);
std::vector<CdfRow> entropy_cdf(const EntropyStats& stats);
void write_entropy_cdf(const EntropyStats& stats, const std::string& path);

// Corpus BLEU: geometric mean of clipped n-gram precisions (n<=max_n) times
// the brevity penalty. No smoothing; returns a value in [0,1].
double corpus_bleu(const std::vector<std::vector<std::string>>& hypotheses,
                   const std::vector<std::vector<std::string>>& references, int max_n = 4);

// LCS-based F1 (beta = 1).
double rouge_l(const std::vector<std::string>& hypothesis,
               const std::vector<std::string>& reference);

// Fraction of positions whose token equals one of the previous two tokens.
double repetition_rate(const std::vector<std::string>& tokens);
double repetition_rate_ids(const std::vector<int>& tokens);

// CSV heatmap of attention weights: header row = source tokens, one row per
// decoder step. Writes a companion "<path>.gates.csv" with the write gates
// when the traces carry them.
void export_heatmap(const std::vector<StepTrace>& traces,
                    const std::vector<std::string>& source_tokens, const std::string& path);

}  // namespace spad
