#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "spad/rng.hpp"

namespace spad {

using TokenSeq = std::vector<std::string>;

struct SentencePair {
  TokenSeq source;
  TokenSeq target;
};

struct ParallelCorpus {
  std::vector<SentencePair> train;
  std::vector<SentencePair> valid;
  std::vector<SentencePair> test;
};

// Token <-> id bijection with reserved ids 0..3 for pad/start/end/unknown.
class Vocabulary {
 public:
  Vocabulary();

  // Adds every token of the training pairs (both sides share one vocabulary).
  static Vocabulary build(const std::vector<SentencePair>& training_pairs);

  int add(const std::string& token);
  int id_of(const std::string& token) const;  // unknown id when absent
  const std::string& token_of(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<int> encode(const TokenSeq& tokens) const;
  TokenSeq decode(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct GeneratorConfig {
  int n_train = 2000;
  int n_valid = 200;
  int n_test = 200;
  int len_min = 4;
  int len_max = 12;
  int vocab_size = 20;  // working symbols, reserved ids excluded
};

// target = source
ParallelCorpus gen_copy(const GeneratorConfig& cfg, std::uint64_t seed);
// target = reversed source
ParallelCorpus gen_reverse(const GeneratorConfig& cfg, std::uint64_t seed);
// target = source with consecutive duplicates collapsed; sources are drawn
// with repeated runs so the collapse is nontrivial
ParallelCorpus gen_dedup(const GeneratorConfig& cfg, std::uint64_t seed);

TokenSeq collapse_consecutive_duplicates(const TokenSeq& tokens);

// One pair per line, tab-separated, whitespace-tokenized sides.
std::vector<SentencePair> load_tsv(const std::string& path);
void save_tsv(const std::vector<SentencePair>& pairs, const std::string& path);

}  // namespace spad
