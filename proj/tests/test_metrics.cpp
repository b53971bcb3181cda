#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spad/metrics.hpp"

using namespace spad;

namespace {

std::vector<std::string> words(const char* s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

StepTrace trace_of(std::vector<double> attention) {
  StepTrace t;
  t.attention = std::move(attention);
  return t;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("attention entropy analytic values") {
  CHECK(attention_entropy({1.0, 0.0, 0.0}) == 0.0);
  CHECK(attention_entropy({0.25, 0.25, 0.25, 0.25}) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(std::fabs(attention_entropy({0.5, 0.25, 0.25}) - 1.5 * std::log(2.0)) < 1e-12);
  CHECK_THROWS(attention_entropy({0.5, 0.4}));       // does not sum to 1
  CHECK_THROWS(attention_entropy({1.5, -0.5}));      // negative mass
  CHECK_THROWS(attention_entropy(std::vector<double>{}));
}

TEST_CASE("entropy report mean and CDF") {
  std::vector<std::vector<StepTrace>> traces{
      {trace_of({1.0, 0.0})},
      {trace_of({0.5, 0.5})},
  };
  EntropyStats stats = entropy_report(traces);
  CHECK(stats.mean == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-12));

  auto rows = entropy_cdf(stats);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == 0.0);
  CHECK(rows[0].cum_fraction == doctest::Approx(0.5));
  CHECK(rows[1].cum_fraction == doctest::Approx(1.0));

  // All one-hot: single collapsed row at entropy 0 with fraction 1.
  std::vector<std::vector<StepTrace>> onehot{{trace_of({1.0, 0.0}), trace_of({0.0, 1.0})}};
  auto collapsed = entropy_cdf(entropy_report(onehot));
  REQUIRE(collapsed.size() == 1);
  CHECK(collapsed[0].value == 0.0);
  CHECK(collapsed[0].cum_fraction == 1.0);
}

TEST_CASE("entropy report matches an independent recomputation on random traces") {
  Rng rng(5, "entropy");
  std::vector<std::vector<StepTrace>> traces;
  double expected_sum = 0.0;
  long count = 0;
  for (int s = 0; s < 10; ++s) {
    std::vector<StepTrace> sentence;
    const int steps = 1 + static_cast<int>(rng.next_below(4));
    for (int i = 0; i < steps; ++i) {
      std::vector<double> p(4);
      double z = 0.0;
      for (double& v : p) {
        v = rng.uniform(0.01, 1.0);
        z += v;
      }
      double h = 0.0;
      for (double& v : p) {
        v /= z;
        h -= v * std::log(v);
      }
      expected_sum += h;
      ++count;
      sentence.push_back(trace_of(p));
    }
    traces.push_back(std::move(sentence));
  }
  EntropyStats stats = entropy_report(traces);
  CHECK(static_cast<long>(stats.entropies.size()) == count);
  CHECK(stats.mean == doctest::Approx(expected_sum / count).epsilon(1e-12));
}

TEST_CASE("corpus BLEU trivial and hand-counted cases") {
  auto ref = words("the cat sat on the mat");
  CHECK(corpus_bleu({ref}, {ref}) == doctest::Approx(1.0).epsilon(1e-12));

  // No 4-gram overlap anywhere: corpus BLEU is exactly 0.
  CHECK(corpus_bleu({words("a b c d")}, {words("a b x d")}) == 0.0);

  // Two-sentence worked example, hand-counted clipped n-gram precisions.
  // Sentence 1: hyp "the the the cat" vs ref "the cat sat":
  //   1-grams: "the"x3 clipped to 1, "cat" 1  -> 2/4
  //   2-grams: "the the"x2 -> 0, "the cat" -> 1/3
  //   3-, 4-grams: 0 matches.
  // Sentence 2: hyp "a b c d e" vs ref "a b c d e":
  //   5/5, 4/4, 3/3, 2/2.
  // Corpus: p1 = 7/9, p2 = 5/7, p3 = 3/5, p4 = 2/3.
  // Lengths: hyp 9, ref 8 -> brevity penalty 1.
  const double expected = std::pow((7.0 / 9.0) * (5.0 / 7.0) * (3.0 / 5.0) * (2.0 / 3.0), 0.25);
  const double got = corpus_bleu({words("the the the cat"), words("a b c d e")},
                                 {words("the cat sat"), words("a b c d e")});
  CHECK(got == doctest::Approx(expected).epsilon(1e-9));

  // Brevity penalty: identical unigrams, hyp half as long.
  const double short_bleu = corpus_bleu({words("a b c d")}, {words("a b c d a b c d")});
  CHECK(short_bleu == doctest::Approx(std::exp(1.0 - 2.0) * std::pow(
                                          (4.0 / 4.0) * (3.0 / 3.0) * (2.0 / 2.0) * (1.0 / 1.0),
                                          0.25))
                          .epsilon(1e-9));
  CHECK(got >= 0.0);
  CHECK(got <= 1.0);
}

TEST_CASE("ROUGE-L trivial and LCS hand oracle") {
  CHECK(rouge_l(words("x y z"), words("x y z")) == doctest::Approx(1.0));
  CHECK(rouge_l(words("a b"), words("c d")) == 0.0);
  // "a b c d" vs "a c d b": LCS "a c d" length 3, P = R = 3/4, F1 = 3/4.
  CHECK(rouge_l(words("a b c d"), words("a c d b")) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("repetition rate") {
  CHECK(repetition_rate(words("a b c d")) == 0.0);
  CHECK(repetition_rate(words("a a a a")) == doctest::Approx(0.75));
  CHECK(repetition_rate(words("a b a b a")) == doctest::Approx(3.0 / 5.0));  // lag-2 repeats
  CHECK(repetition_rate_ids({7, 7, 3}) == doctest::Approx(1.0 / 3.0));

  // Brute-force scan oracle on a random case.
  Rng rng(9, "rep");
  std::vector<int> ids;
  for (int i = 0; i < 50; ++i) ids.push_back(static_cast<int>(rng.next_below(3)));
  long repeats = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if ((i >= 1 && ids[i] == ids[i - 1]) || (i >= 2 && ids[i] == ids[i - 2])) ++repeats;
  }
  CHECK(repetition_rate_ids(ids) ==
        doctest::Approx(static_cast<double>(repeats) / 50.0).epsilon(1e-15));
}

TEST_CASE("heatmap export writes attention rows and a gates companion") {
  std::vector<StepTrace> traces;
  StepTrace s1 = trace_of({0.25, 0.75});
  s1.gates = {0.9, 0.1};
  StepTrace s2 = trace_of({0.5, 0.5});
  s2.gates = {0.4, 0.6};
  traces = {s1, s2};

  const std::string path = "heatmap_test.csv";
  export_heatmap(traces, {"w01", "w02"}, path);
  std::string body = slurp(path);
  CHECK(body.substr(0, 8) == "w01,w02\n");
  CHECK(std::count(body.begin(), body.end(), '\n') == 3);  // header + 2 steps
  CHECK(body.find("0.25") != std::string::npos);

  std::string gates = slurp(path + ".gates.csv");
  CHECK(std::count(gates.begin(), gates.end(), '\n') == 3);
  CHECK(gates.find("0.9") != std::string::npos);

  // Re-export is byte-identical.
  const std::string again = "heatmap_test2.csv";
  export_heatmap(traces, {"w01", "w02"}, again);
  CHECK(slurp(again) == body);

  std::remove(path.c_str());
  std::remove((path + ".gates.csv").c_str());
  std::remove(again.c_str());
  std::remove((again + ".gates.csv").c_str());

  // 1x1 trace: single-cell data row of 1.0.
  export_heatmap({trace_of({1.0})}, {"w00"}, "heatmap_one.csv");
  CHECK(slurp("heatmap_one.csv") == "w00\n1\n");
  std::remove("heatmap_one.csv");

  CHECK_THROWS(export_heatmap({trace_of({0.5, 0.5})}, {"w00"}, "heatmap_bad.csv"));
  std::remove("heatmap_bad.csv");
}

TEST_CASE("entropy CDF file format") {
  std::vector<std::vector<StepTrace>> traces{
      {trace_of({1.0, 0.0}), trace_of({0.5, 0.5}), trace_of({0.5, 0.5})}};
  write_entropy_cdf(entropy_report(traces), "cdf_test.csv");
  std::string body = slurp("cdf_test.csv");
  CHECK(body.rfind("value,cum_fraction\n", 0) == 0);
  CHECK(body.find(",1\n") != std::string::npos);  // last row reaches fraction 1
  std::remove("cdf_test.csv");
}
