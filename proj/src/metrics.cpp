#include "spad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

namespace spad {

double attention_entropy(const std::vector<double>& distribution) {
  if (distribution.empty()) throw std::invalid_argument("attention_entropy: empty input");
  double total = 0.0;
  double entropy = 0.0;
  for (double p : distribution) {
    if (p < 0.0) throw std::invalid_argument("attention_entropy: negative probability");
    total += p;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument("attention_entropy: input sums to " + std::to_string(total));
  }
  return entropy;
}

EntropyStats entropy_report(const std::vector<std::vector<StepTrace>>& traces) {
  EntropyStats stats;
  for (const auto& sentence : traces) {
    for (const auto& step : sentence) {
      stats.entropies.push_back(attention_entropy(step.attention));
    }
  }
  if (stats.entropies.empty()) throw std::invalid_argument("entropy_report: no traces");
  stats.sorted = stats.entropies;
  std::sort(stats.sorted.begin(), stats.sorted.end());
  stats.mean = std::accumulate(stats.entropies.begin(), stats.entropies.end(), 0.0) /
               static_cast<double>(stats.entropies.size());
  return stats;
}

std::vector<CdfRow> entropy_cdf(const EntropyStats& stats) {
  std::vector<CdfRow> rows;
  const double n = static_cast<double>(stats.sorted.size());
  for (std::size_t i = 0; i < stats.sorted.size(); ++i) {
    // Collapse ties to one row at the highest cumulative fraction.
    if (i + 1 < stats.sorted.size() && stats.sorted[i + 1] == stats.sorted[i]) continue;
    rows.push_back(CdfRow{stats.sorted[i], static_cast<double>(i + 1) / n});
  }
  return rows;
}

void write_entropy_cdf(const EntropyStats& stats, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_entropy_cdf: cannot open " + path);
  os << "value,cum_fraction\n";
  char buf[64];
  for (const CdfRow& row : entropy_cdf(stats)) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", row.value, row.cum_fraction);
    os << buf;
  }
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, long> ngram_counts(const std::vector<std::string>& tokens, int n) {
  std::map<Ngram, long> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<long>(i),
                   tokens.begin() + static_cast<long>(i) + n)];
  }
  return counts;
}

}  // namespace

double corpus_bleu(const std::vector<std::vector<std::string>>& hypotheses,
                   const std::vector<std::vector<std::string>>& references, int max_n) {
  if (hypotheses.empty() || hypotheses.size() != references.size()) {
    throw std::invalid_argument("corpus_bleu: corpora must be nonempty and of equal size");
  }
  std::vector<long> clipped(static_cast<std::size_t>(max_n), 0);
  std::vector<long> total(static_cast<std::size_t>(max_n), 0);
  long hyp_len = 0;
  long ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    hyp_len += static_cast<long>(hypotheses[s].size());
    ref_len += static_cast<long>(references[s].size());
    for (int n = 1; n <= max_n; ++n) {
      auto hyp_counts = ngram_counts(hypotheses[s], n);
      auto ref_counts = ngram_counts(references[s], n);
      for (const auto& [gram, count] : hyp_counts) {
        total[static_cast<std::size_t>(n - 1)] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) {
          clipped[static_cast<std::size_t>(n - 1)] += std::min(count, it->second);
        }
      }
    }
  }
  double log_precision = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const long c = clipped[static_cast<std::size_t>(n - 1)];
    const long t = total[static_cast<std::size_t>(n - 1)];
    if (c == 0 || t == 0) return 0.0;
    log_precision += std::log(static_cast<double>(c) / static_cast<double>(t));
  }
  double brevity = 1.0;
  if (hyp_len < ref_len) {
    brevity = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  }
  return brevity * std::exp(log_precision / static_cast<double>(max_n));
}

double rouge_l(const std::vector<std::string>& hypothesis,
               const std::vector<std::string>& reference) {
  if (hypothesis.empty() || reference.empty()) return 0.0;
  const std::size_t m = hypothesis.size(), n = reference.size();
  std::vector<long> prev(n + 1, 0), cur(n + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      cur[j] = hypothesis[i - 1] == reference[j - 1] ? prev[j - 1] + 1
                                                     : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[n]);
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(m);
  const double recall = lcs / static_cast<double>(n);
  return 2.0 * precision * recall / (precision + recall);
}

double repetition_rate(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("repetition_rate: empty sequence");
  long repeats = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if ((i >= 1 && tokens[i] == tokens[i - 1]) || (i >= 2 && tokens[i] == tokens[i - 2])) {
      ++repeats;
    }
  }
  return static_cast<double>(repeats) / static_cast<double>(tokens.size());
}

double repetition_rate_ids(const std::vector<int>& tokens) {
  std::vector<std::string> s;
  s.reserve(tokens.size());
  for (int t : tokens) s.push_back(std::to_string(t));
  return repetition_rate(s);
}

void export_heatmap(const std::vector<StepTrace>& traces,
                    const std::vector<std::string>& source_tokens, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("export_heatmap: cannot open " + path);
  char buf[64];
  for (std::size_t j = 0; j < source_tokens.size(); ++j) {
    os << (j ? "," : "") << source_tokens[j];
  }
  os << "\n";
  bool any_gates = false;
  for (const StepTrace& step : traces) {
    if (step.attention.size() != source_tokens.size()) {
      throw std::invalid_argument("export_heatmap: trace width differs from source length");
    }
    for (std::size_t j = 0; j < step.attention.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%s%.17g", j ? "," : "", step.attention[j]);
      os << buf;
    }
    os << "\n";
    any_gates = any_gates || !step.gates.empty();
  }
  if (!any_gates) return;
  std::ofstream gs(path + ".gates.csv", std::ios::trunc);
  if (!gs) throw std::runtime_error("export_heatmap: cannot open " + path + ".gates.csv");
  for (std::size_t j = 0; j < source_tokens.size(); ++j) {
    gs << (j ? "," : "") << source_tokens[j];
  }
  gs << "\n";
  for (const StepTrace& step : traces) {
    for (std::size_t j = 0; j < step.gates.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%s%.17g", j ? "," : "", step.gates[j]);
      gs << buf;
    }
    gs << "\n";
  }
}

}  // namespace spad
