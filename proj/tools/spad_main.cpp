#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spad/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spad: seq2seq toolkit with a scratchpad write mechanism"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train = app.add_subcommand("train", "Train a model from a JSON config");
  train->add_option("config", config_path, "Path to the run config")->required();

  std::string run_dir, checkpoint, test_tsv;
  int beam = 0, max_len = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Decode the test set and report metrics");
  evaluate->add_option("run_dir", run_dir, "Completed run directory")->required();
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint override");
  evaluate->add_option("--test", test_tsv, "Test TSV override");
  evaluate->add_option("--beam", beam, "Beam width override");
  evaluate->add_option("--max-len", max_len, "Decode length override");

  std::string an_run_dir, an_checkpoint, an_test_tsv;
  int an_max_len = 0, heatmap_limit = 5;
  auto* analyze = app.add_subcommand("analyze", "Attention entropy report and heatmaps");
  analyze->add_option("run_dir", an_run_dir, "Completed run directory")->required();
  analyze->add_option("--checkpoint", an_checkpoint, "Checkpoint override");
  analyze->add_option("--test", an_test_tsv, "Test TSV override");
  analyze->add_option("--max-len", an_max_len, "Decode length override");
  analyze->add_option("--heatmaps", heatmap_limit, "Number of per-example heatmaps");

  std::string run_a, run_b;
  auto* compare = app.add_subcommand("compare", "Compare the metrics of two evaluated runs");
  compare->add_option("run_a", run_a, "First run directory")->required();
  compare->add_option("run_b", run_b, "Second run directory")->required();

  std::string task = "copy", out_dir = "data";
  std::uint64_t seed = 1;
  spad::GeneratorConfig gen;
  auto* gen_data = app.add_subcommand("gen-data", "Write synthetic task TSVs");
  gen_data->add_option("task", task, "copy | reverse | dedup")->required();
  gen_data->add_option("--out", out_dir, "Output directory");
  gen_data->add_option("--seed", seed, "Generator seed");
  gen_data->add_option("--n-train", gen.n_train, "Training pairs");
  gen_data->add_option("--n-valid", gen.n_valid, "Validation pairs");
  gen_data->add_option("--n-test", gen.n_test, "Test pairs");
  gen_data->add_option("--len-min", gen.len_min, "Minimum source length");
  gen_data->add_option("--len-max", gen.len_max, "Maximum source length");
  gen_data->add_option("--vocab-size", gen.vocab_size, "Working symbols");

  std::vector<std::string> ckpt_paths;
  std::string avg_out;
  auto* average = app.add_subcommand("average-checkpoints", "Average checkpoints elementwise");
  average->add_option("checkpoints", ckpt_paths, "Input checkpoints")->required();
  average->add_option("--out", avg_out, "Output checkpoint path")->required();

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) return spad::cmd_train(config_path);
  if (evaluate->parsed()) return spad::cmd_evaluate(run_dir, checkpoint, test_tsv, beam, max_len);
  if (analyze->parsed())
    return spad::cmd_analyze(an_run_dir, an_checkpoint, an_test_tsv, an_max_len, heatmap_limit);
  if (compare->parsed()) return spad::cmd_compare(run_a, run_b);
  if (gen_data->parsed()) return spad::cmd_gen_data(task, gen, seed, out_dir);
  if (average->parsed()) return spad::cmd_average_checkpoints(ckpt_paths, avg_out);
  return 2;
}
