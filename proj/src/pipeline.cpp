#include "spad/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "spad/decoding.hpp"
#include "spad/metrics.hpp"
#include "spad/training.hpp"

namespace spad {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ParallelCorpus resolve_corpus(const RunConfig& cfg) {
  if (cfg.task.type == "copy") return gen_copy(cfg.task.generator, cfg.seed);
  if (cfg.task.type == "reverse") return gen_reverse(cfg.task.generator, cfg.seed);
  if (cfg.task.type == "dedup") return gen_dedup(cfg.task.generator, cfg.seed);
  ParallelCorpus corpus;
  corpus.train = load_tsv(cfg.task.train_path);
  corpus.valid = load_tsv(cfg.task.valid_path);
  corpus.test = load_tsv(cfg.task.test_path);
  return corpus;
}

std::uint64_t pairs_hash(const std::vector<SentencePair>& pairs) {
  std::ostringstream os;
  for (const auto& p : pairs) {
    for (const auto& t : p.source) os << t << ' ';
    os << '\t';
    for (const auto& t : p.target) os << t << ' ';
    os << '\n';
  }
  return fnv1a64(os.str());
}

// Token-budget batches over length-sorted examples; order of batches is
// shuffled per epoch, membership is fixed.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<SentencePair>& pairs,
                                                   int batch_tokens) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs[a].source.size() < pairs[b].source.size();
  });
  std::vector<std::vector<std::size_t>> batches;
  long budget_used = 0;
  for (std::size_t idx : order) {
    const long cost = static_cast<long>(
        std::max(pairs[idx].source.size(), pairs[idx].target.size() + 1));
    if (batches.empty() || (budget_used + cost > batch_tokens && !batches.back().empty())) {
      batches.emplace_back();
      budget_used = 0;
    }
    batches.back().push_back(idx);
    budget_used += cost;
  }
  return batches;
}

template <typename T>
void shuffle_with(std::vector<T>& v, Rng rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(rng.next_below(i))]);
  }
}

double validation_loss(const Seq2SeqModel& model, const Vocabulary& vocab,
                       const std::vector<SentencePair>& pairs, double label_smoothing,
                       double coverage_lambda, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Rng tf = Rng(seed, "val_tf").derive("i", i);
    ForwardResult fwd = model.forward_teacher_forced(
        vocab.encode(pairs[i].source), vocab.encode(pairs[i].target), tf, nullptr,
        /*training=*/false, /*teacher_forcing_p=*/1.0, label_smoothing, coverage_lambda);
    total += fwd.loss.item();
  }
  return total / static_cast<double>(pairs.size());
}

int guard(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

TrainOutcome run_training(const RunConfig& cfg, const TrainObserver* observer) {
  validate(cfg);
  const fs::path run_dir(cfg.output_dir);
  fs::create_directories(run_dir / "data");

  ParallelCorpus corpus = resolve_corpus(cfg);
  if (corpus.train.empty() || corpus.valid.empty()) {
    throw std::invalid_argument("run_training: empty train or valid split");
  }
  Vocabulary vocab = Vocabulary::build(corpus.train);

  save_tsv(corpus.train, (run_dir / "data" / "train.tsv").string());
  save_tsv(corpus.valid, (run_dir / "data" / "valid.tsv").string());
  save_tsv(corpus.test, (run_dir / "data" / "test.tsv").string());
  vocab.save((run_dir / "vocab.txt").string());

  RunConfig resolved = cfg;
  resolved.model.src_vocab = vocab.size();
  resolved.model.tgt_vocab = vocab.size();
  {
    std::ofstream os(run_dir / "resolved_config.json", std::ios::trunc);
    os << canonical_json(resolved);
  }
  const std::uint64_t hash = config_hash(resolved);

  Seq2SeqModel model = Seq2SeqModel::create(resolved.model, cfg.seed);
  if (!cfg.training.init_checkpoint.empty()) {
    auto expected = model.params().names();
    model.params() = load_checkpoint(cfg.training.init_checkpoint, nullptr, &expected);
  }

  OptimizerState optimizer;
  const AdamConfig adam{cfg.training.beta1, cfg.training.beta2, cfg.training.epsilon};
  double lr = cfg.training.lr;

  auto batches = make_batches(corpus.train, cfg.training.batch_tokens);

  std::ofstream metric_log(run_dir / "metrics.jsonl", std::ios::trunc);
  std::ofstream timing_log(run_dir / "timing.log", std::ios::trunc);

  TrainOutcome outcome;
  outcome.run_dir = run_dir.string();
  std::vector<std::string> checkpoint_paths;
  long global_step = 0;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= cfg.training.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    std::vector<std::size_t> batch_order(batches.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);
    shuffle_with(batch_order, Rng(cfg.seed, "batch_order").derive("epoch",
                                                                  static_cast<std::uint64_t>(epoch)));
    double train_loss_sum = 0.0;
    long train_examples = 0;
    for (std::size_t b : batch_order) {
      const auto& batch = batches[b];
      model.params().zero_grads();
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const SentencePair& pair = corpus.train[batch[k]];
        const std::uint64_t ex_key =
            static_cast<std::uint64_t>(epoch) * 1000003ULL + batch[k];
        Rng tf = Rng(cfg.seed, "tf").derive("ex", ex_key);
        Rng drop = Rng(cfg.seed, "dropout").derive("ex", ex_key);
        Tape tape;
        Tape::Scope scope(tape);
        ForwardResult fwd = model.forward_teacher_forced(
            vocab.encode(pair.source), vocab.encode(pair.target), tf, &drop,
            /*training=*/true, cfg.training.teacher_forcing, cfg.training.label_smoothing,
            cfg.training.coverage_lambda);
        Tensor scaled = scale(fwd.loss, 1.0 / static_cast<double>(batch.size()));
        tape.backward(scaled);
        batch_loss += fwd.loss.item();
      }
      clip_grad_norm(model.params(), cfg.training.clip_norm);
      if (observer && observer->on_step) {
        double sq = 0.0;
        for (auto& [name, t] : model.params().tensors()) sq += t.grad().square().sum();
        observer->on_step(std::sqrt(sq));
      }
      optimizer.adam_step(model.params(), lr, adam);
      ++global_step;
      train_loss_sum += batch_loss;
      train_examples += static_cast<long>(batch.size());
      outcome.step_train_losses.push_back(batch_loss /
                                          static_cast<double>(batch.size()));
    }
    const double train_loss = train_loss_sum / static_cast<double>(train_examples);
    const double val_loss =
        validation_loss(model, vocab, corpus.valid, cfg.training.label_smoothing,
                        cfg.training.coverage_lambda, cfg.seed);
    outcome.train_losses.push_back(train_loss);
    outcome.val_losses.push_back(val_loss);

    metric_log << "{\"epoch\":" << epoch << ",\"step\":" << global_step
               << ",\"train_loss\":" << fmt(train_loss) << ",\"val_loss\":" << fmt(val_loss)
               << ",\"lr\":" << fmt(lr) << "}\n";
    metric_log.flush();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                      epoch_start)
                            .count();
    timing_log << "epoch " << epoch << " wall_time " << wall << "\n";

    const std::string ckpt =
        (run_dir / ("ckpt_epoch" + std::to_string(epoch) + ".bin")).string();
    save_checkpoint(model.params(), hash, ckpt);
    checkpoint_paths.push_back(ckpt);

    outcome.epochs_run = epoch;
    lr = lr_plateau_decay(outcome.val_losses, lr, cfg.training.lr_decay);
    if (val_loss < best_val) {
      best_val = val_loss;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= cfg.training.patience && cfg.training.early_stopping) {
      break;
    }
  }

  const int k = std::min<int>(cfg.training.average_last,
                              static_cast<int>(checkpoint_paths.size()));
  std::vector<ParameterSet> last;
  for (int i = static_cast<int>(checkpoint_paths.size()) - k;
       i < static_cast<int>(checkpoint_paths.size()); ++i) {
    last.push_back(load_checkpoint(checkpoint_paths[static_cast<std::size_t>(i)]));
  }
  save_checkpoint(average_parameters(last), hash, (run_dir / "model_final.bin").string());
  return outcome;
}

EvalOutcome evaluate_model(const Seq2SeqModel& model, const Vocabulary& vocab,
                           const std::vector<SentencePair>& pairs, int beam, int max_len) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_model: empty test set");
  EvalOutcome out;
  out.test_hash = pairs_hash(pairs);
  std::vector<std::vector<std::string>> hyps, refs;
  std::vector<std::vector<StepTrace>> traces;
  long matched = 0, total_positions = 0;
  double repetition_sum = 0.0;
  for (const auto& pair : pairs) {
    const std::vector<int> src = vocab.encode(pair.source);
    DecodeResult decoded = beam == 1
                               ? greedy_decode(model, src, max_len)
                               : beam_decode(model, src, beam, max_len).best;
    out.outputs.push_back(decoded.tokens);
    traces.push_back(decoded.traces);
    TokenSeq hyp_tokens = vocab.decode(decoded.tokens);
    const std::vector<int> ref = vocab.encode(pair.target);
    const std::size_t aligned = std::min(decoded.tokens.size(), ref.size());
    for (std::size_t i = 0; i < aligned; ++i) {
      if (decoded.tokens[i] == ref[i]) ++matched;
    }
    total_positions += static_cast<long>(std::max(decoded.tokens.size(), ref.size()));
    repetition_sum += decoded.tokens.empty() ? 0.0 : repetition_rate_ids(decoded.tokens);
    hyps.push_back(std::move(hyp_tokens));
    refs.push_back(pair.target);
  }
  out.bleu = corpus_bleu(hyps, refs);
  double rouge_sum = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) rouge_sum += rouge_l(hyps[i], refs[i]);
  out.rouge_l = rouge_sum / static_cast<double>(hyps.size());
  out.mean_entropy = entropy_report(traces).mean;
  out.repetition_rate = repetition_sum / static_cast<double>(pairs.size());
  out.token_accuracy =
      total_positions == 0 ? 0.0
                           : static_cast<double>(matched) / static_cast<double>(total_positions);
  return out;
}

Seq2SeqModel load_run_model(const std::string& run_dir, Vocabulary* vocab_out,
                            RunConfig* cfg_out, const std::string& checkpoint_override) {
  const fs::path dir(run_dir);
  RunConfig cfg = parse_config_file((dir / "resolved_config.json").string());
  Vocabulary vocab = Vocabulary::load((dir / "vocab.txt").string());
  cfg.model.src_vocab = vocab.size();
  cfg.model.tgt_vocab = vocab.size();
  const std::string ckpt = checkpoint_override.empty()
                               ? (dir / "model_final.bin").string()
                               : checkpoint_override;
  auto expected = Seq2SeqModel::parameter_names(cfg.model);
  ParameterSet params = load_checkpoint(ckpt, nullptr, &expected);
  if (vocab_out) *vocab_out = vocab;
  if (cfg_out) *cfg_out = cfg;
  return Seq2SeqModel(cfg.model, std::move(params));
}

int cmd_train(const std::string& config_path) {
  return guard([&] {
    RunConfig cfg = parse_config_file(config_path);
    TrainOutcome outcome = run_training(cfg);
    std::cout << "run dir: " << outcome.run_dir << "\n"
              << "epochs: " << outcome.epochs_run << "\n"
              << "final val loss: " << fmt(outcome.val_losses.back()) << "\n";
  });
}

int cmd_evaluate(const std::string& run_dir, const std::string& checkpoint,
                 const std::string& test_tsv, int beam, int max_len) {
  return guard([&] {
    Vocabulary vocab;
    RunConfig cfg;
    Seq2SeqModel model = load_run_model(run_dir, &vocab, &cfg, checkpoint);
    const fs::path dir(run_dir);
    const std::string tsv =
        test_tsv.empty() ? (dir / "data" / "test.tsv").string() : test_tsv;
    auto pairs = load_tsv(tsv);
    const int effective_beam = beam > 0 ? beam : cfg.decode.beam;
    const int effective_len = max_len > 0 ? max_len : cfg.decode.max_len;
    EvalOutcome out = evaluate_model(model, vocab, pairs, effective_beam, effective_len);

    json report;
    report["bleu"] = out.bleu;
    report["rouge_l"] = out.rouge_l;
    report["mean_entropy"] = out.mean_entropy;
    report["repetition_rate"] = out.repetition_rate;
    report["token_accuracy"] = out.token_accuracy;
    report["test_hash"] = out.test_hash;
    std::ofstream os(dir / "metrics.json", std::ios::trunc);
    os << report.dump(2) << "\n";
    std::cout << report.dump(2) << "\n";

    std::ofstream hyp_os(dir / "outputs.txt", std::ios::trunc);
    for (const auto& tokens : out.outputs) {
      TokenSeq decoded = vocab.decode(tokens);
      for (std::size_t i = 0; i < decoded.size(); ++i) hyp_os << (i ? " " : "") << decoded[i];
      hyp_os << "\n";
    }
  });
}

int cmd_analyze(const std::string& run_dir, const std::string& checkpoint,
                const std::string& test_tsv, int max_len, int heatmap_limit) {
  return guard([&] {
    Vocabulary vocab;
    RunConfig cfg;
    Seq2SeqModel model = load_run_model(run_dir, &vocab, &cfg, checkpoint);
    const fs::path dir(run_dir);
    const std::string tsv =
        test_tsv.empty() ? (dir / "data" / "test.tsv").string() : test_tsv;
    auto pairs = load_tsv(tsv);
    const int effective_len = max_len > 0 ? max_len : cfg.decode.max_len;

    const fs::path out_dir = dir / "analysis";
    fs::create_directories(out_dir);
    std::vector<std::vector<StepTrace>> traces;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      DecodeResult decoded = greedy_decode(model, vocab.encode(pairs[i].source), effective_len);
      if (static_cast<int>(i) < heatmap_limit) {
        char name[40];
        std::snprintf(name, sizeof(name), "heatmap_%03zu.csv", i);
        export_heatmap(decoded.traces, pairs[i].source, (out_dir / name).string());
      }
      traces.push_back(std::move(decoded.traces));
    }
    EntropyStats stats = entropy_report(traces);
    write_entropy_cdf(stats, (out_dir / "entropy_cdf.csv").string());
    json summary;
    summary["mean_entropy"] = stats.mean;
    summary["steps"] = stats.entropies.size();
    summary["test_hash"] = pairs_hash(pairs);
    std::ofstream os(out_dir / "analysis.json", std::ios::trunc);
    os << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
  });
}

int cmd_compare(const std::string& run_dir_a, const std::string& run_dir_b) {
  json a, b;
  const int rc = guard([&] {
    auto read_metrics = [](const std::string& dir) {
      std::ifstream is(fs::path(dir) / "metrics.json");
      if (!is) {
        throw std::invalid_argument("compare: " + dir +
                                    "/metrics.json not found (run evaluate first)");
      }
      return json::parse(is);
    };
    a = read_metrics(run_dir_a);
    b = read_metrics(run_dir_b);
    if (a.at("test_hash") != b.at("test_hash")) {
      throw std::invalid_argument("compare: runs were evaluated on different test sets");
    }
  });
  if (rc != 0) return rc;

  std::cout << "metric               A                B                delta (A-B)\n";
  for (const char* key : {"bleu", "rouge_l", "mean_entropy", "repetition_rate",
                          "token_accuracy"}) {
    const double va = a.at(key).get<double>();
    const double vb = b.at(key).get<double>();
    std::printf("%-20s %-16.6f %-16.6f %+.6f\n", key, va, vb, va - vb);
  }
  const double ea = a.at("mean_entropy").get<double>();
  const double eb = b.at("mean_entropy").get<double>();
  if (std::abs(ea - eb) < 1e-12) {
    std::cout << "mean entropy: inconclusive\n";
    return 3;
  }
  std::cout << "lower mean entropy: " << (ea < eb ? "A" : "B") << "\n";
  return ea < eb ? 0 : 3;
}

int cmd_gen_data(const std::string& task, const GeneratorConfig& gen, std::uint64_t seed,
                 const std::string& out_dir) {
  return guard([&] {
    ParallelCorpus corpus;
    if (task == "copy") corpus = gen_copy(gen, seed);
    else if (task == "reverse") corpus = gen_reverse(gen, seed);
    else if (task == "dedup") corpus = gen_dedup(gen, seed);
    else throw std::invalid_argument("gen-data: unknown task " + task);
    fs::create_directories(out_dir);
    save_tsv(corpus.train, (fs::path(out_dir) / "train.tsv").string());
    save_tsv(corpus.valid, (fs::path(out_dir) / "valid.tsv").string());
    save_tsv(corpus.test, (fs::path(out_dir) / "test.tsv").string());
    std::cout << "wrote " << corpus.train.size() << "/" << corpus.valid.size() << "/"
              << corpus.test.size() << " pairs to " << out_dir << "\n";
  });
}

int cmd_average_checkpoints(const std::vector<std::string>& paths,
                            const std::string& out_path) {
  return guard([&] {
    if (paths.empty()) throw std::invalid_argument("average-checkpoints: no inputs");
    std::vector<ParameterSet> sets;
    std::uint64_t hash = 0;
    for (const auto& p : paths) sets.push_back(load_checkpoint(p, &hash));
    save_checkpoint(average_parameters(sets), hash, out_path);
    std::cout << "averaged " << sets.size() << " checkpoints into " << out_path << "\n";
  });
}

}  // namespace spad
