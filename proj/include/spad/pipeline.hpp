#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spad/config.hpp"
#include "spad/data.hpp"
#include "spad/model.hpp"

namespace spad {

struct TrainOutcome {
  std::string run_dir;
  std::vector<double> train_losses;  // per epoch
  std::vector<double> val_losses;    // per epoch
  std::vector<double> step_train_losses;  // per optimizer step
  int epochs_run = 0;
};

struct TrainObserver {
  // Called once per optimizer step with the post-clip global gradient norm.
  std::function<void(double post_clip_grad_norm)> on_step;
};

// Full training run: resolves the task data, writes the run directory
// (resolved config, data TSVs, vocabulary, per-epoch checkpoints, metric log)
// and the final averaged model. Deterministic given the config seed.
TrainOutcome run_training(const RunConfig& cfg, const TrainObserver* observer = nullptr);

struct EvalOutcome {
  double bleu = 0.0;
  double rouge_l = 0.0;
  double mean_entropy = 0.0;
  double repetition_rate = 0.0;
  double token_accuracy = 0.0;
  std::uint64_t test_hash = 0;
  std::vector<std::vector<int>> outputs;
};

// Decodes `pairs` (greedy when beam == 1) and scores against the references.
EvalOutcome evaluate_model(const Seq2SeqModel& model, const Vocabulary& vocab,
                           const std::vector<SentencePair>& pairs, int beam, int max_len);

// Loads the model of a completed run: resolved config + vocabulary +
// checkpoint (model_final.bin unless overridden).
Seq2SeqModel load_run_model(const std::string& run_dir, Vocabulary* vocab_out,
                            RunConfig* cfg_out = nullptr,
                            const std::string& checkpoint_override = "");

// CLI entry points. Exit codes: 0 success, 1 validation error, 2 runtime
// error, 3 inconclusive comparison.
int cmd_train(const std::string& config_path);
int cmd_evaluate(const std::string& run_dir, const std::string& checkpoint,
                 const std::string& test_tsv, int beam, int max_len);
int cmd_analyze(const std::string& run_dir, const std::string& checkpoint,
                const std::string& test_tsv, int max_len, int heatmap_limit);
int cmd_compare(const std::string& run_dir_a, const std::string& run_dir_b);
int cmd_gen_data(const std::string& task, const GeneratorConfig& gen, std::uint64_t seed,
                 const std::string& out_dir);
int cmd_average_checkpoints(const std::vector<std::string>& paths, const std::string& out_path);

}  // namespace spad
