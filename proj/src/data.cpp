#include "spad/data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spad {
namespace {

const char* const kReserved[] = {"<pad>", "<s>", "</s>", "<unk>"};

std::string symbol(int k) {
  std::ostringstream os;
  os << "w" << (k < 10 ? "0" : "") << k;
  return os.str();
}

TokenSeq random_sequence(Rng& rng, const GeneratorConfig& cfg, bool runny) {
  const int len = cfg.len_min + static_cast<int>(rng.next_below(
                                    static_cast<std::uint64_t>(cfg.len_max - cfg.len_min + 1)));
  TokenSeq out;
  out.reserve(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    // For the dedup task roughly 40% of positions repeat their predecessor,
    // so collapsing runs actually shortens the target.
    if (runny && i > 0 && rng.bernoulli(0.4)) {
      out.push_back(out.back());
    } else {
      out.push_back(symbol(static_cast<int>(
          rng.next_below(static_cast<std::uint64_t>(cfg.vocab_size)))));
    }
  }
  return out;
}

using PairFn = SentencePair (*)(TokenSeq source);

ParallelCorpus generate(const GeneratorConfig& cfg, std::uint64_t seed, const char* task,
                        bool runny, PairFn make_pair) {
  if (cfg.vocab_size < 2) throw std::invalid_argument("generator: vocab_size must be >= 2");
  if (cfg.len_min < 1 || cfg.len_max < cfg.len_min) {
    throw std::invalid_argument("generator: bad length range");
  }
  Rng base(seed, std::string("gen/") + task);
  ParallelCorpus corpus;
  auto fill = [&](std::vector<SentencePair>& split, const char* name, int n) {
    for (int i = 0; i < n; ++i) {
      Rng rng = base.derive(name, static_cast<std::uint64_t>(i));
      split.push_back(make_pair(random_sequence(rng, cfg, runny)));
    }
  };
  fill(corpus.train, "train", cfg.n_train);
  fill(corpus.valid, "valid", cfg.n_valid);
  fill(corpus.test, "test", cfg.n_test);
  return corpus;
}

}  // namespace

Vocabulary::Vocabulary() {
  for (const char* r : kReserved) add(r);
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

Vocabulary Vocabulary::build(const std::vector<SentencePair>& training_pairs) {
  Vocabulary vocab;
  for (const auto& pair : training_pairs) {
    for (const auto& t : pair.source) vocab.add(t);
    for (const auto& t : pair.target) vocab.add(t);
  }
  return vocab;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? 3 : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size()) {
    throw std::out_of_range("Vocabulary: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const TokenSeq& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_of(t));
  return ids;
}

TokenSeq Vocabulary::decode(const std::vector<int>& ids) const {
  TokenSeq tokens;
  tokens.reserve(ids.size());
  for (int id : ids) tokens.push_back(token_of(id));
  return tokens;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("Vocabulary::save: cannot open " + path);
  for (const auto& t : tokens_) os << t << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("Vocabulary::load: cannot open " + path);
  Vocabulary vocab;
  std::string line;
  int index = 0;
  while (std::getline(is, line)) {
    if (index < 4) {
      if (line != kReserved[index]) {
        throw std::runtime_error("Vocabulary::load: reserved token mismatch at id " +
                                 std::to_string(index));
      }
    } else {
      vocab.add(line);
    }
    ++index;
  }
  return vocab;
}

ParallelCorpus gen_copy(const GeneratorConfig& cfg, std::uint64_t seed) {
  return generate(cfg, seed, "copy", false,
                  [](TokenSeq src) { return SentencePair{src, src}; });
}

ParallelCorpus gen_reverse(const GeneratorConfig& cfg, std::uint64_t seed) {
  return generate(cfg, seed, "reverse", false, [](TokenSeq src) {
    TokenSeq tgt(src.rbegin(), src.rend());
    return SentencePair{std::move(src), std::move(tgt)};
  });
}

ParallelCorpus gen_dedup(const GeneratorConfig& cfg, std::uint64_t seed) {
  return generate(cfg, seed, "dedup", true, [](TokenSeq src) {
    TokenSeq tgt = collapse_consecutive_duplicates(src);
    return SentencePair{std::move(src), std::move(tgt)};
  });
}

TokenSeq collapse_consecutive_duplicates(const TokenSeq& tokens) {
  TokenSeq out;
  for (const auto& t : tokens) {
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

std::vector<SentencePair> load_tsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_tsv: cannot open " + path);
  std::vector<SentencePair> pairs;
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("load_tsv: " + path + ":" + std::to_string(line_no) +
                               ": expected a tab-separated pair");
    }
    SentencePair pair;
    std::istringstream src(line.substr(0, tab));
    std::istringstream tgt(line.substr(tab + 1));
    for (std::string tok; src >> tok;) pair.source.push_back(tok);
    for (std::string tok; tgt >> tok;) pair.target.push_back(tok);
    if (pair.source.empty() || pair.target.empty()) {
      throw std::runtime_error("load_tsv: " + path + ":" + std::to_string(line_no) +
                               ": empty side");
    }
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) throw std::runtime_error("load_tsv: " + path + " has no pairs");
  return pairs;
}

void save_tsv(const std::vector<SentencePair>& pairs, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("save_tsv: cannot open " + path);
  for (const auto& pair : pairs) {
    for (std::size_t i = 0; i < pair.source.size(); ++i) {
      os << (i ? " " : "") << pair.source[i];
    }
    os << "\t";
    for (std::size_t i = 0; i < pair.target.size(); ++i) {
      os << (i ? " " : "") << pair.target[i];
    }
    os << "\n";
  }
}

}  // namespace spad
