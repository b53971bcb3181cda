#pragma once

#include <map>
#include <string>
#include <vector>

#include "spad/ops.hpp"
#include "spad/params.hpp"

namespace spad {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators mirroring the parameter set.
class OptimizerState {
 public:
  long step_count() const { return step_count_; }

  // Bias-corrected Adam update; reads each parameter's populated gradient.
  // Aborts with the tensor name on a non-finite gradient.
  void adam_step(ParameterSet& params, double lr, const AdamConfig& cfg = {});

 private:
  struct Moments {
    Eigen::ArrayXd m;
    Eigen::ArrayXd v;
  };
  std::map<std::string, Moments> moments_;
  long step_count_ = 0;
};

// Scales all gradients by max_norm/norm when the global L2 norm exceeds
// max_norm. Returns the pre-clip norm.
double clip_grad_norm(ParameterSet& params, double max_norm);

// lr *= factor iff the latest validation loss failed to improve on the
// previous one. History is ordered oldest-first and needs >= 2 entries to decay.
double lr_plateau_decay(const std::vector<double>& val_loss_history, double lr, double factor);

// Cross-entropy of log-probabilities against (1-eps) on gold plus eps/V uniform.
Tensor label_smoothed_nll(const Tensor& log_probs, int gold, double epsilon);

}  // namespace spad
