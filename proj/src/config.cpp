#include "spad/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace spad {
namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: field '" + path + "': " + what);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) field_error(path.empty() ? key : path + "." + key, "unknown field");
  }
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    field_error(path + "." + key, e.what());
  }
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
  check_keys(root, "", {"seed", "output_dir", "task", "model", "training", "decode"});

  RunConfig cfg;
  read(root, "", "seed", cfg.seed);
  read(root, "", "output_dir", cfg.output_dir);

  if (root.contains("task")) {
    const json& t = root.at("task");
    check_keys(t, "task",
               {"type", "n_train", "n_valid", "n_test", "len_min", "len_max", "vocab_size",
                "train_path", "valid_path", "test_path"});
    read(t, "task", "type", cfg.task.type);
    read(t, "task", "n_train", cfg.task.generator.n_train);
    read(t, "task", "n_valid", cfg.task.generator.n_valid);
    read(t, "task", "n_test", cfg.task.generator.n_test);
    read(t, "task", "len_min", cfg.task.generator.len_min);
    read(t, "task", "len_max", cfg.task.generator.len_max);
    read(t, "task", "vocab_size", cfg.task.generator.vocab_size);
    read(t, "task", "train_path", cfg.task.train_path);
    read(t, "task", "valid_path", cfg.task.valid_path);
    read(t, "task", "test_path", cfg.task.test_path);
  }
  if (root.contains("model")) {
    const json& m = root.at("model");
    check_keys(m, "model",
               {"cell", "embed_dim", "hidden", "enc_layers", "dec_layers", "bidirectional",
                "score_function", "score_mlp_tanh", "scratchpad", "pin_gates", "coverage",
                "residual", "dropout"});
    read(m, "model", "cell", cfg.model.cell);
    read(m, "model", "embed_dim", cfg.model.embed_dim);
    read(m, "model", "hidden", cfg.model.hidden);
    read(m, "model", "enc_layers", cfg.model.enc_layers);
    read(m, "model", "dec_layers", cfg.model.dec_layers);
    read(m, "model", "bidirectional", cfg.model.bidirectional);
    read(m, "model", "score_function", cfg.model.score_function);
    read(m, "model", "score_mlp_tanh", cfg.model.score_mlp_tanh);
    read(m, "model", "scratchpad", cfg.model.scratchpad);
    read(m, "model", "pin_gates", cfg.model.pin_gates);
    read(m, "model", "coverage", cfg.model.coverage);
    read(m, "model", "residual", cfg.model.residual);
    read(m, "model", "dropout", cfg.model.dropout);
  }
  if (root.contains("training")) {
    const json& tr = root.at("training");
    check_keys(tr, "training",
               {"lr", "beta1", "beta2", "epsilon", "clip_norm", "label_smoothing", "lr_decay",
                "teacher_forcing", "coverage_lambda", "epochs", "batch_tokens", "average_last",
                "early_stopping", "patience", "init_checkpoint"});
    read(tr, "training", "lr", cfg.training.lr);
    read(tr, "training", "beta1", cfg.training.beta1);
    read(tr, "training", "beta2", cfg.training.beta2);
    read(tr, "training", "epsilon", cfg.training.epsilon);
    read(tr, "training", "clip_norm", cfg.training.clip_norm);
    read(tr, "training", "label_smoothing", cfg.training.label_smoothing);
    read(tr, "training", "lr_decay", cfg.training.lr_decay);
    read(tr, "training", "teacher_forcing", cfg.training.teacher_forcing);
    read(tr, "training", "coverage_lambda", cfg.training.coverage_lambda);
    read(tr, "training", "epochs", cfg.training.epochs);
    read(tr, "training", "batch_tokens", cfg.training.batch_tokens);
    read(tr, "training", "average_last", cfg.training.average_last);
    read(tr, "training", "early_stopping", cfg.training.early_stopping);
    read(tr, "training", "patience", cfg.training.patience);
    read(tr, "training", "init_checkpoint", cfg.training.init_checkpoint);
  }
  if (root.contains("decode")) {
    const json& d = root.at("decode");
    check_keys(d, "decode", {"beam", "max_len"});
    read(d, "decode", "beam", cfg.decode.beam);
    read(d, "decode", "max_len", cfg.decode.max_len);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config_json(buffer.str());
}

void validate(const RunConfig& cfg) {
  if (cfg.model.scratchpad && cfg.model.coverage) {
    field_error("model", "scratchpad and coverage are mutually exclusive");
  }
  cell_type_from_string(cfg.model.cell);
  score_function_from_string(cfg.model.score_function);
  if (cfg.task.type != "copy" && cfg.task.type != "reverse" && cfg.task.type != "dedup" &&
      cfg.task.type != "tsv") {
    field_error("task.type", "expected copy|reverse|dedup|tsv, got " + cfg.task.type);
  }
  if (cfg.task.type == "tsv") {
    for (const auto& [name, value] :
         {std::pair{"train_path", cfg.task.train_path},
          std::pair{"valid_path", cfg.task.valid_path},
          std::pair{"test_path", cfg.task.test_path}}) {
      if (value.empty()) field_error(std::string("task.") + name, "required for tsv task");
      if (!std::ifstream(value)) {
        field_error(std::string("task.") + name, "file not found: " + value);
      }
    }
  }
  auto require_prob = [](const char* name, double p) {
    if (p < 0.0 || p > 1.0) field_error(name, "must be in [0,1]");
  };
  require_prob("training.teacher_forcing", cfg.training.teacher_forcing);
  require_prob("training.label_smoothing", cfg.training.label_smoothing);
  if (cfg.model.dropout < 0.0 || cfg.model.dropout >= 1.0) {
    field_error("model.dropout", "must be in [0,1)");
  }
  if (cfg.training.lr_decay <= 0.0 || cfg.training.lr_decay > 1.0) {
    field_error("training.lr_decay", "must be in (0,1]");
  }
  if (cfg.training.epochs < 1) field_error("training.epochs", "must be >= 1");
  if (cfg.training.batch_tokens < 1) field_error("training.batch_tokens", "must be >= 1");
  if (cfg.decode.beam < 1) field_error("decode.beam", "must be >= 1");
  if (cfg.decode.max_len < 1) field_error("decode.max_len", "must be >= 1");
  if (cfg.output_dir.empty()) field_error("output_dir", "must not be empty");
}

std::string canonical_json(const RunConfig& cfg) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  json root;
  root["seed"] = cfg.seed;
  root["output_dir"] = cfg.output_dir;
  json& t = root["task"];
  t["type"] = cfg.task.type;
  t["n_train"] = cfg.task.generator.n_train;
  t["n_valid"] = cfg.task.generator.n_valid;
  t["n_test"] = cfg.task.generator.n_test;
  t["len_min"] = cfg.task.generator.len_min;
  t["len_max"] = cfg.task.generator.len_max;
  t["vocab_size"] = cfg.task.generator.vocab_size;
  t["train_path"] = cfg.task.train_path;
  t["valid_path"] = cfg.task.valid_path;
  t["test_path"] = cfg.task.test_path;
  json& m = root["model"];
  m["cell"] = cfg.model.cell;
  m["embed_dim"] = cfg.model.embed_dim;
  m["hidden"] = cfg.model.hidden;
  m["enc_layers"] = cfg.model.enc_layers;
  m["dec_layers"] = cfg.model.dec_layers;
  m["bidirectional"] = cfg.model.bidirectional;
  m["score_function"] = cfg.model.score_function;
  m["score_mlp_tanh"] = cfg.model.score_mlp_tanh;
  m["scratchpad"] = cfg.model.scratchpad;
  m["pin_gates"] = cfg.model.pin_gates;
  m["coverage"] = cfg.model.coverage;
  m["residual"] = cfg.model.residual;
  m["dropout"] = cfg.model.dropout;
  json& tr = root["training"];
  tr["lr"] = cfg.training.lr;
  tr["beta1"] = cfg.training.beta1;
  tr["beta2"] = cfg.training.beta2;
  tr["epsilon"] = cfg.training.epsilon;
  tr["clip_norm"] = cfg.training.clip_norm;
  tr["label_smoothing"] = cfg.training.label_smoothing;
  tr["lr_decay"] = cfg.training.lr_decay;
  tr["teacher_forcing"] = cfg.training.teacher_forcing;
  tr["coverage_lambda"] = cfg.training.coverage_lambda;
  tr["epochs"] = cfg.training.epochs;
  tr["batch_tokens"] = cfg.training.batch_tokens;
  tr["average_last"] = cfg.training.average_last;
  tr["early_stopping"] = cfg.training.early_stopping;
  tr["patience"] = cfg.training.patience;
  tr["init_checkpoint"] = cfg.training.init_checkpoint;
  json& d = root["decode"];
  d["beam"] = cfg.decode.beam;
  d["max_len"] = cfg.decode.max_len;
  return root.dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  // Where a run writes its artifacts does not change what was trained, so the
  // hash ignores output_dir; checkpoints stay interchangeable across run dirs.
  RunConfig keyed = cfg;
  keyed.output_dir.clear();
  return fnv1a64(canonical_json(keyed));
}

}  // namespace spad
