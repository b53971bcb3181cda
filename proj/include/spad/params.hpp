#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spad/rng.hpp"
#include "spad/tensor.hpp"

namespace spad {

// Named learnable tensors. The map keeps a stable canonical order so
// serialization, averaging and optimizer state all agree on iteration order.
class ParameterSet {
 public:
  Tensor& create(const std::string& name, Shape shape, Rng init_stream);
  Tensor& create_zeros(const std::string& name, Shape shape);

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) > 0; }

  std::map<std::string, Tensor>& tensors() { return tensors_; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  std::vector<std::string> names() const;
  void zero_grads();

  // Deep copy with fresh payloads (frozen snapshot for e.g. evaluation).
  ParameterSet clone() const;

 private:
  std::map<std::string, Tensor> tensors_;
};

inline constexpr double kInitUniformRange = 0.08;

// Binary checkpoint container: magic, format version, config hash and a named
// tensor index followed by little-endian float64 payloads.
void save_checkpoint(const ParameterSet& params, std::uint64_t config_hash,
                     const std::string& path);

// Loads a checkpoint. When `expected` is nonempty, the stored name/shape set
// must match it exactly; the error message lists the difference.
ParameterSet load_checkpoint(const std::string& path, std::uint64_t* config_hash_out = nullptr,
                             const std::vector<std::string>* expected_names = nullptr);

// Elementwise arithmetic mean over checkpoints with identical name/shape sets.
ParameterSet average_parameters(const std::vector<ParameterSet>& sets);

}  // namespace spad
