#pragma once

#include <cstdint>
#include <string>

#include "spad/data.hpp"
#include "spad/model.hpp"

namespace spad {

struct TaskConfig {
  std::string type = "copy";  // copy | reverse | dedup | tsv
  GeneratorConfig generator;
  std::string train_path;  // tsv task only
  std::string valid_path;
  std::string test_path;
};

struct TrainingConfig {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 2.0;
  double label_smoothing = 0.1;
  double lr_decay = 0.7;
  double teacher_forcing = 0.5;
  double coverage_lambda = 1.0;
  int epochs = 15;
  int batch_tokens = 2000;
  int average_last = 5;
  bool early_stopping = false;
  int patience = 3;
  std::string init_checkpoint;
};

struct DecodeConfig {
  int beam = 4;
  int max_len = 32;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "run";
  TaskConfig task;
  ModelConfig model;  // vocab sizes are filled from the data at train time
  TrainingConfig training;
  DecodeConfig decode;
};

// Parses a config file, filling defaults. Throws std::invalid_argument with a
// field-level message on unknown fields, type errors or invariant violations.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_json(const std::string& text);

void validate(const RunConfig& cfg);

// Canonical serialization with every default materialized; keys sorted.
std::string canonical_json(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& s);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace spad
