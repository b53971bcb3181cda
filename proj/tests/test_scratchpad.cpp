#include <cmath>

#include "doctest.h"
#include "spad/scratchpad.hpp"
#include "test_util.hpp"

using namespace spad;
using testutil::grad_check;
using testutil::random_tensor;

namespace {

ParameterSet make_params(int state_dim, int context_dim, int memory_dim, int hidden,
                         std::uint64_t seed) {
  ParameterSet ps;
  register_scratchpad(ps, state_dim, context_dim, memory_dim, hidden, seed);
  return ps;
}

}  // namespace

TEST_CASE("update: zero parameters give zero, output always in [-1,1]") {
  ParameterSet ps = make_params(2, 2, 2, 3, 1);
  for (auto& [name, t] : ps.tensors()) t.value().setZero();
  Tensor u = compute_update(Tensor::vector({5, -5}), Tensor::vector({3, 3}), ps);
  CHECK(u.value().abs().maxCoeff() == 0.0);

  ParameterSet big = make_params(2, 2, 2, 3, 2);
  for (auto& [name, t] : big.tensors()) t.value().setConstant(30.0);
  Tensor bounded = compute_update(Tensor::vector({100, 100}), Tensor::vector({100, 100}), big);
  CHECK(bounded.value().abs().maxCoeff() <= 1.0);
}

TEST_CASE("update: 2-dim hand oracle") {
  ParameterSet ps = make_params(1, 1, 2, 2, 3);
  Rng rng(3, "fill");
  for (auto& [name, t] : ps.tensors()) {
    Rng stream = rng.derive(name, 0);
    for (long i = 0; i < t.size(); ++i) t.value()(i) = stream.uniform(-0.5, 0.5);
  }
  const double s = 0.4, c = -0.9;
  const double in[2] = {s, c};
  double hidden[2];
  for (long r = 0; r < 2; ++r) {
    double pre = ps.at("write/upd/b1").value()(r);
    for (long k = 0; k < 2; ++k) pre += ps.at("write/upd/W1").value()(r * 2 + k) * in[k];
    hidden[r] = std::tanh(pre);
  }
  Tensor u = compute_update(Tensor::vector({s}), Tensor::vector({c}), ps);
  for (long r = 0; r < 2; ++r) {
    double pre = ps.at("write/upd/b2").value()(r);
    for (long k = 0; k < 2; ++k) pre += ps.at("write/upd/W2").value()(r * 2 + k) * hidden[k];
    CHECK(u.value()(r) == doctest::Approx(std::tanh(pre)).epsilon(1e-13));
  }
}

TEST_CASE("gate: zero parameters give 0.5; saturation limits") {
  ParameterSet ps = make_params(1, 1, 1, 2, 4);
  for (auto& [name, t] : ps.tensors()) t.value().setZero();
  Tensor g = compute_gate(Tensor::vector({1}), Tensor::vector({2}), Tensor::vector({3}), ps);
  CHECK(g.item() == 0.5);

  ps.at("write/gate/b2").value().setConstant(60.0);
  Tensor keep = compute_gate(Tensor::vector({1}), Tensor::vector({2}), Tensor::vector({3}), ps);
  CHECK(keep.item() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gate: hand oracle on a 1-dim case") {
  ParameterSet ps = make_params(1, 1, 1, 1, 5);
  auto set = [&](const char* name, double v) { ps.at(name).value().setConstant(v); };
  set("write/gate/W1", 0.3);  // broadcast over the 3 concatenated inputs
  set("write/gate/b1", -0.1);
  set("write/gate/W2", 0.8);
  set("write/gate/b2", 0.2);
  const double s = 0.5, c = -0.2, h = 0.9;
  const double hidden = std::tanh(0.3 * (s + c + h) - 0.1);
  const double expected = 1.0 / (1.0 + std::exp(-(0.8 * hidden + 0.2)));
  Tensor g = compute_gate(Tensor::vector({s}), Tensor::vector({c}), Tensor::vector({h}), ps);
  CHECK(g.item() == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("write: hand case gate 0.5, h 0.4, u -0.2 gives 0.1") {
  // Craft parameters so the gate is exactly 0.5 and the update is exactly
  // tanh(atanh(-0.2)) = -0.2: zero gate MLP, update MLP that passes a constant.
  ParameterSet ps = make_params(1, 1, 1, 1, 6);
  for (auto& [name, t] : ps.tensors()) t.value().setZero();
  ps.at("write/upd/b2").value().setConstant(std::atanh(-0.2));

  ScratchpadMemory mem = ScratchpadMemory::from_encoder({Tensor::vector({0.4})});
  auto [next, record] = write(mem, Tensor::vector({0.3}), Tensor::vector({-0.6}), ps);
  CHECK(record.gates[0].item() == 0.5);
  CHECK(record.update.item() == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(next.states[0].item() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(next.version == 1);
}

TEST_CASE("write: keep and overwrite limits") {
  ParameterSet ps = make_params(2, 2, 2, 3, 7);
  Rng rng(7, "fill");
  for (auto& [name, t] : ps.tensors()) {
    Rng stream = rng.derive(name, 0);
    for (long i = 0; i < t.size(); ++i) t.value()(i) = stream.uniform(-0.4, 0.4);
  }
  ScratchpadMemory mem = ScratchpadMemory::from_encoder(
      {Tensor::vector({0.2, -0.8}), Tensor::vector({-0.3, 0.5})});
  Tensor s = Tensor::vector({0.1, 0.6});
  Tensor c = Tensor::vector({-0.4, 0.2});

  ps.at("write/gate/b2").value().setConstant(60.0);  // gates -> 1: keep everything
  auto [kept, kept_rec] = write(mem, s, c, ps);
  for (std::size_t t = 0; t < 2; ++t) {
    for (long j = 0; j < 2; ++j) {
      CHECK(kept.states[t].value()(j) == mem.states[t].value()(j));
    }
  }

  ps.at("write/gate/b2").value().setConstant(-60.0);  // gates -> 0: full overwrite
  auto [overwritten, over_rec] = write(mem, s, c, ps);
  for (std::size_t t = 0; t < 2; ++t) {
    for (long j = 0; j < 2; ++j) {
      CHECK(overwritten.states[t].value()(j) ==
            doctest::Approx(over_rec.update.value()(j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("write invariants over a 1000-step fuzz") {
  ParameterSet ps = make_params(3, 3, 3, 4, 8);
  Rng rng(8, "fuzz");
  int violations = 0;
  ScratchpadMemory mem = ScratchpadMemory::from_encoder(
      {random_tensor({3}, rng.derive("h", 0), -1, 1, false),
       random_tensor({3}, rng.derive("h", 1), -1, 1, false),
       random_tensor({3}, rng.derive("h", 2), -1, 1, false)});
  for (int step = 0; step < 1000; ++step) {
    // Occasionally rescramble the write MLP weights so the fuzz covers many
    // gate/update regimes, not one trajectory.
    if (step % 97 == 0) {
      Rng fill = rng.derive("fill", step);
      for (auto& [name, t] : ps.tensors()) {
        for (long i = 0; i < t.size(); ++i) t.value()(i) = fill.uniform(-2.0, 2.0);
      }
    }
    Tensor s = random_tensor({3}, rng.derive("s", step), -1, 1, false);
    Tensor c = random_tensor({3}, rng.derive("c", step), -1, 1, false);
    auto [next, record] = write(mem, s, c, ps);
    for (std::size_t t = 0; t < mem.states.size(); ++t) {
      const double gate = record.gates[t].item();
      if (!(gate > 0.0 && gate < 1.0)) ++violations;
      for (long j = 0; j < 3; ++j) {
        const double u = record.update.value()(j);
        const double old_v = mem.states[t].value()(j);
        const double new_v = next.states[t].value()(j);
        if (std::fabs(u) > 1.0) ++violations;
        if (std::fabs(new_v) > 1.0) ++violations;
        if (new_v < std::min(old_v, u) - 1e-15 || new_v > std::max(old_v, u) + 1e-15) {
          ++violations;
        }
      }
    }
    if (next.version != mem.version + 1) ++violations;
    mem = std::move(next);
  }
  CHECK(violations == 0);
}

TEST_CASE("gradients flow through three chained writes") {
  ParameterSet ps = make_params(2, 2, 2, 3, 9);
  Rng rng(9, "grad");
  for (auto& [name, t] : ps.tensors()) {
    Rng stream = rng.derive(name, 0);
    for (long i = 0; i < t.size(); ++i) t.value()(i) = stream.uniform(-0.4, 0.4);
  }
  Tensor h0 = random_tensor({2}, rng.derive("h", 0));
  Tensor h1 = random_tensor({2}, rng.derive("h", 1));
  Tensor s = random_tensor({2}, rng.derive("s", 0));
  Tensor c = random_tensor({2}, rng.derive("c", 0));
  std::vector<Tensor> inputs{h0, h1, s, c};
  for (auto& [name, t] : ps.tensors()) inputs.push_back(t);
  auto f = [&] {
    ScratchpadMemory mem = ScratchpadMemory::from_encoder({h0, h1});
    for (int step = 0; step < 3; ++step) mem = write(mem, s, c, ps).first;
    return add(sum(mul(mem.states[0], mem.states[0])), sum(mem.states[1]));
  };
  CHECK(grad_check(inputs, f) < 1e-5);
}
