#include "spad/training.hpp"

#include <cmath>
#include <stdexcept>

namespace spad {

void OptimizerState::adam_step(ParameterSet& params, double lr, const AdamConfig& cfg) {
  ++step_count_;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count_));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count_));
  for (auto& [name, t] : params.tensors()) {
    Eigen::ArrayXd& g = t.grad();
    if (!g.allFinite()) {
      throw std::runtime_error("adam_step: non-finite gradient in tensor " + name);
    }
    auto [it, inserted] = moments_.try_emplace(name);
    Moments& mv = it->second;
    if (inserted) {
      mv.m = Eigen::ArrayXd::Zero(t.size());
      mv.v = Eigen::ArrayXd::Zero(t.size());
    }
    mv.m = cfg.beta1 * mv.m + (1.0 - cfg.beta1) * g;
    mv.v = cfg.beta2 * mv.v + (1.0 - cfg.beta2) * g.square();
    t.value() -= lr * (mv.m / bias1) / ((mv.v / bias2).sqrt() + cfg.epsilon);
  }
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  double sq = 0.0;
  for (auto& [name, t] : params.tensors()) sq += t.grad().square().sum();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto& [name, t] : params.tensors()) t.grad() *= factor;
  }
  return norm;
}

double lr_plateau_decay(const std::vector<double>& val_loss_history, double lr,
                        double factor) {
  const std::size_t n = val_loss_history.size();
  if (n < 2) return lr;
  return val_loss_history[n - 1] >= val_loss_history[n - 2] ? lr * factor : lr;
}

Tensor label_smoothed_nll(const Tensor& log_probs, int gold, double epsilon) {
  if (gold < 0 || gold >= log_probs.size()) {
    throw std::out_of_range("label_smoothed_nll: gold id " + std::to_string(gold) +
                            " outside vocabulary of size " + std::to_string(log_probs.size()));
  }
  const double v = static_cast<double>(log_probs.size());
  Tensor gold_term = scale(pick(log_probs, gold), -(1.0 - epsilon));
  if (epsilon == 0.0) return gold_term;
  Tensor uniform_term = scale(sum(log_probs), -epsilon / v);
  return add(gold_term, uniform_term);
}

}  // namespace spad
