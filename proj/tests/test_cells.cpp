#include <cmath>

#include "doctest.h"
#include "spad/cells.hpp"
#include "test_util.hpp"

using namespace spad;
using testutil::grad_check;
using testutil::random_tensor;

namespace {

void fill_random(ParameterSet& ps, Rng base, double lo = -0.4, double hi = 0.4) {
  for (auto& [name, t] : ps.tensors()) {
    Rng rng = base.derive(name, 0);
    for (long i = 0; i < t.size(); ++i) t.value()(i) = rng.uniform(lo, hi);
  }
}

std::vector<Tensor> all_tensors(ParameterSet& ps) {
  std::vector<Tensor> out;
  for (auto& [name, t] : ps.tensors()) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("gru zero everything stays zero") {
  ParameterSet ps;
  register_cell(ps, "cell", CellType::Gru, 3, 2, 0);
  for (auto& [name, t] : ps.tensors()) t.value().setZero();
  CellState out = gru_step(Tensor::zeros({3}), initial_cell_state(CellType::Gru, 2), ps, "cell");
  CHECK(out.hidden.value().abs().maxCoeff() == 0.0);
}

TEST_CASE("gru saturated update gate preserves the previous hidden state") {
  ParameterSet ps;
  register_cell(ps, "cell", CellType::Gru, 2, 2, 1);
  fill_random(ps, Rng(1, "fill"));
  ps.at("cell/bz").value().setConstant(60.0);  // z -> 1, h' = z*h + (1-z)*n = h
  CellState prev{Tensor::vector({0.4, -0.2}), Tensor{}};
  CellState out = gru_step(Tensor::vector({1.0, -1.0}), prev, ps, "cell");
  CHECK(out.hidden.value()(0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(out.hidden.value()(1) == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("gru one-step hand oracle") {
  // Independent recomputation of the GRU equations with plain doubles,
  // dimension 1 so every matrix is a scalar.
  ParameterSet ps;
  register_cell(ps, "cell", CellType::Gru, 1, 1, 2);
  auto set = [&](const char* name, double v) { ps.at(name).value()(0) = v; };
  set("cell/Wz", 0.5);
  set("cell/Uz", -0.3);
  set("cell/bz", 0.1);
  set("cell/Wr", 0.2);
  set("cell/Ur", 0.7);
  set("cell/br", -0.2);
  set("cell/Wn", -0.6);
  set("cell/Un", 0.4);
  set("cell/bn", 0.3);
  const double x = 0.8, h = -0.5;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double z = sig(0.5 * x + -0.3 * h + 0.1);
  const double r = sig(0.2 * x + 0.7 * h + -0.2);
  const double n = std::tanh(-0.6 * x + 0.4 * (r * h) + 0.3);
  const double expected = z * h + (1.0 - z) * n;

  CellState out = gru_step(Tensor::vector({x}), CellState{Tensor::vector({h}), Tensor{}}, ps,
                           "cell");
  CHECK(out.hidden.item() == doctest::Approx(expected).epsilon(1e-14));
  CHECK(std::fabs(out.hidden.item()) <= 1.0);
}

TEST_CASE("lstm zero case and gate forcing") {
  ParameterSet ps;
  register_cell(ps, "cell", CellType::Lstm, 2, 2, 3);
  for (auto& [name, t] : ps.tensors()) t.value().setZero();
  CellState out =
      lstm_step(Tensor::zeros({2}), initial_cell_state(CellType::Lstm, 2), ps, "cell");
  CHECK(out.hidden.value().abs().maxCoeff() == 0.0);
  CHECK(out.cell.value().abs().maxCoeff() == 0.0);

  fill_random(ps, Rng(3, "fill"));
  ps.at("cell/bf").value().setConstant(60.0);   // forget -> 1
  ps.at("cell/bi").value().setConstant(-60.0);  // input -> 0, cell preserved
  CellState prev{Tensor::vector({0.2, -0.6}), Tensor::vector({0.9, -0.1})};
  LstmGates gates;
  CellState next = lstm_step(Tensor::vector({0.3, 0.4}), prev, ps, "cell", &gates);
  CHECK(next.cell.value()(0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(next.cell.value()(1) == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(gates.forget.value().minCoeff() > 0.999);
  CHECK(gates.input.value().maxCoeff() < 0.001);
}

TEST_CASE("lstm one-step hand oracle") {
  ParameterSet ps;
  register_cell(ps, "cell", CellType::Lstm, 1, 1, 4);
  fill_random(ps, Rng(4, "fill"));
  const double x = -0.7, h = 0.3, c = 0.5;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  auto pre = [&](const char* gate) {
    std::string p = std::string("cell/") + gate;
    return ps.at("cell/W" + std::string(gate)).value()(0) * x +
           ps.at("cell/U" + std::string(gate)).value()(0) * h +
           ps.at("cell/b" + std::string(gate)).value()(0);
  };
  const double i = sig(pre("i")), f = sig(pre("f")), o = sig(pre("o"));
  const double g = std::tanh(pre("g"));
  const double c_next = f * c + i * g;
  const double h_next = o * std::tanh(c_next);

  CellState out = lstm_step(Tensor::vector({x}),
                            CellState{Tensor::vector({h}), Tensor::vector({c})}, ps, "cell");
  CHECK(out.cell.item() == doctest::Approx(c_next).epsilon(1e-14));
  CHECK(out.hidden.item() == doctest::Approx(h_next).epsilon(1e-14));
}

TEST_CASE("cell gradients through 5 recurrent steps match finite differences") {
  for (CellType type : {CellType::Gru, CellType::Lstm}) {
    ParameterSet ps;
    register_cell(ps, "cell", type, 3, 3, 5);
    fill_random(ps, Rng(5, "fill"));
    std::vector<Tensor> xs;
    for (int t = 0; t < 5; ++t) xs.push_back(random_tensor({3}, Rng(5, "x").derive("t", t)));

    std::vector<Tensor> inputs = all_tensors(ps);
    inputs.insert(inputs.end(), xs.begin(), xs.end());
    auto f = [&] {
      CellState state = initial_cell_state(type, 3);
      for (const Tensor& x : xs) state = cell_step(type, x, state, ps, "cell");
      return sum(mul(state.hidden, state.hidden));
    };
    CHECK(grad_check(inputs, f) < 1e-5);
  }
}

TEST_CASE("encoder shapes and single-layer reduction") {
  EncoderConfig cfg;
  cfg.cell = CellType::Gru;
  cfg.layers = 1;
  cfg.bidirectional = false;
  cfg.embed_dim = 3;
  cfg.hidden = 4;
  ParameterSet ps;
  register_encoder(ps, cfg, 6, 7);
  fill_random(ps, Rng(7, "fill"));

  EncoderOutputs single = encode({2}, ps, cfg);
  CHECK(single.states.size() == 1);
  CHECK(single.states[0].size() == 4);

  // Unidirectional single layer equals the raw cell unroll over embeddings.
  std::vector<int> source{1, 4, 2};
  EncoderOutputs enc = encode(source, ps, cfg);
  CellState state = initial_cell_state(cfg.cell, cfg.hidden);
  for (std::size_t t = 0; t < source.size(); ++t) {
    state = gru_step(embedding_row(ps.at("src_embed"), source[t]), state, ps, "enc/l0/fwd");
    for (long j = 0; j < 4; ++j) {
      CHECK(enc.states[t].value()(j) == doctest::Approx(state.hidden.value()(j)).epsilon(1e-15));
    }
  }
  CHECK(enc.final_forward.hidden.value()(0) ==
        doctest::Approx(state.hidden.value()(0)).epsilon(1e-15));
}

TEST_CASE("bidirectional encoder doubles the output width") {
  EncoderConfig uni;
  uni.embed_dim = 3;
  uni.hidden = 4;
  uni.bidirectional = false;
  EncoderConfig bi = uni;
  bi.bidirectional = true;

  ParameterSet ps_uni, ps_bi;
  register_encoder(ps_uni, uni, 6, 8);
  register_encoder(ps_bi, bi, 6, 8);
  fill_random(ps_uni, Rng(8, "fill"));
  fill_random(ps_bi, Rng(8, "fill"));

  CHECK(encoder_output_dim(uni) == 4);
  CHECK(encoder_output_dim(bi) == 8);
  EncoderOutputs enc = encode({1, 2, 3}, ps_bi, bi);
  CHECK(enc.states[0].size() == 8);
  CHECK(enc.bidirectional);
  CHECK(enc.final_backward.hidden.defined());
}

TEST_CASE("stacked encoder consumes the lower layer output and backprops") {
  EncoderConfig cfg;
  cfg.layers = 2;
  cfg.bidirectional = true;
  cfg.embed_dim = 3;
  cfg.hidden = 3;
  ParameterSet ps;
  register_encoder(ps, cfg, 5, 9);
  fill_random(ps, Rng(9, "fill"));
  std::vector<Tensor> inputs = all_tensors(ps);
  auto f = [&] {
    EncoderOutputs enc = encode({1, 3, 4, 2}, ps, cfg);
    Tensor acc = sum(enc.states[0]);
    for (std::size_t t = 1; t < enc.states.size(); ++t) acc = add(acc, sum(enc.states[t]));
    return acc;
  };
  CHECK(grad_check(inputs, f) < 1e-5);
}

TEST_CASE("init_decoder_state zero encoder gives tanh(bias), 2-dim hand oracle") {
  EncoderConfig cfg;
  cfg.embed_dim = 2;
  cfg.hidden = 2;
  cfg.bidirectional = true;
  ParameterSet ps;
  register_encoder(ps, cfg, 4, 10);
  ps.create("dec/init/W", {2, 4}, Rng(10, "init/dec/init/W"));
  ps.create("dec/init/b", {2}, Rng(10, "init/dec/init/b"));
  fill_random(ps, Rng(10, "fill"));

  EncoderOutputs zero_enc;
  zero_enc.bidirectional = true;
  zero_enc.final_forward.hidden = Tensor::zeros({2});
  zero_enc.final_backward.hidden = Tensor::zeros({2});
  Tensor seeded = init_decoder_state(zero_enc, ps);
  for (long j = 0; j < 2; ++j) {
    CHECK(seeded.value()(j) ==
          doctest::Approx(std::tanh(ps.at("dec/init/b").value()(j))).epsilon(1e-14));
  }

  EncoderOutputs enc;
  enc.bidirectional = true;
  enc.final_forward.hidden = Tensor::vector({0.3, -0.1});
  enc.final_backward.hidden = Tensor::vector({0.5, 0.2});
  Tensor out = init_decoder_state(enc, ps);
  const auto& w = ps.at("dec/init/W").value();
  const auto& b = ps.at("dec/init/b").value();
  const double cat[4] = {0.3, -0.1, 0.5, 0.2};
  for (long r = 0; r < 2; ++r) {
    double pre = b(r);
    for (long k = 0; k < 4; ++k) pre += w(r * 4 + k) * cat[k];
    CHECK(out.value()(r) == doctest::Approx(std::tanh(pre)).epsilon(1e-14));
  }
}

TEST_CASE("encoder length equivariance for a length-1 prefix") {
  EncoderConfig cfg;
  cfg.embed_dim = 3;
  cfg.hidden = 3;
  cfg.bidirectional = false;
  ParameterSet ps;
  register_encoder(ps, cfg, 5, 11);
  fill_random(ps, Rng(11, "fill"));
  // The first forward state does not depend on later tokens.
  EncoderOutputs a = encode({2, 3, 4}, ps, cfg);
  EncoderOutputs b = encode({2, 1, 1}, ps, cfg);
  for (long j = 0; j < 3; ++j) CHECK(a.states[0].value()(j) == b.states[0].value()(j));
}
