#include "spad/params.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace spad {

Tensor& ParameterSet::create(const std::string& name, Shape shape, Rng init_stream) {
  if (contains(name)) throw std::logic_error("ParameterSet: duplicate tensor " + name);
  Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  for (long i = 0; i < t.size(); ++i) {
    t.value()(i) = init_stream.uniform(-kInitUniformRange, kInitUniformRange);
  }
  return tensors_.emplace(name, std::move(t)).first->second;
}

Tensor& ParameterSet::create_zeros(const std::string& name, Shape shape) {
  if (contains(name)) throw std::logic_error("ParameterSet: duplicate tensor " + name);
  return tensors_.emplace(name, Tensor::zeros(std::move(shape), true)).first->second;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("ParameterSet: no tensor named " + name);
  return it->second;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("ParameterSet: no tensor named " + name);
  return it->second;
}

std::vector<std::string> ParameterSet::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, t] : tensors_) out.push_back(name);
  return out;
}

void ParameterSet::zero_grads() {
  for (auto& [name, t] : tensors_) t.zero_grad();
}

ParameterSet ParameterSet::clone() const {
  ParameterSet copy;
  for (const auto& [name, t] : tensors_) {
    Tensor fresh = Tensor::zeros(t.shape(), t.requires_grad());
    fresh.value() = t.value();
    copy.tensors_.emplace(name, std::move(fresh));
  }
  return copy;
}

namespace {

constexpr char kMagic[8] = {'S', 'P', 'A', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written natively as little-endian");

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  auto n = read_pod<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

}  // namespace

void save_checkpoint(const ParameterSet& params, std::uint64_t config_hash,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, kFormatVersion);
  write_pod<std::uint64_t>(os, config_hash);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(params.tensors().size()));
  for (const auto& [name, t] : params.tensors()) {
    write_string(os, name);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape().size()));
    for (int d : t.shape()) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.value().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

ParameterSet load_checkpoint(const std::string& path, std::uint64_t* config_hash_out,
                             const std::vector<std::string>* expected_names) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  auto version = read_pod<std::uint32_t>(is);
  if (version != kFormatVersion) {
    throw std::runtime_error("checkpoint: format version " + std::to_string(version) +
                             " unsupported (expected " + std::to_string(kFormatVersion) + ")");
  }
  auto config_hash = read_pod<std::uint64_t>(is);
  if (config_hash_out) *config_hash_out = config_hash;
  auto count = read_pod<std::uint32_t>(is);
  ParameterSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = read_string(is);
    auto rank = read_pod<std::uint32_t>(is);
    if (rank > 8) throw std::runtime_error("checkpoint: corrupt index (rank " +
                                           std::to_string(rank) + " for " + name + ")");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<int>(read_pod<std::uint32_t>(is));
    Tensor& t = params.create_zeros(name, shape);
    is.read(reinterpret_cast<char*>(t.value().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated payload for " + name);
  }
  if (expected_names) {
    const std::vector<std::string> loaded_names = params.names();
    std::set<std::string> have(loaded_names.begin(), loaded_names.end());
    std::set<std::string> want(expected_names->begin(), expected_names->end());
    if (have != want) {
      std::ostringstream diff;
      diff << "checkpoint: tensor names do not match the model config.";
      for (const auto& n : want) {
        if (!have.count(n)) diff << " missing: " << n << ";";
      }
      for (const auto& n : have) {
        if (!want.count(n)) diff << " unexpected: " << n << ";";
      }
      throw std::runtime_error(diff.str());
    }
  }
  return params;
}

ParameterSet average_parameters(const std::vector<ParameterSet>& sets) {
  if (sets.empty()) throw std::invalid_argument("average_parameters: no checkpoints");
  // Mean as first + mean-of-deltas: exact when all checkpoints are identical
  // (deltas are exactly zero), and better conditioned than a raw sum.
  ParameterSet out = sets.front().clone();
  std::map<std::string, Eigen::ArrayXd> delta_sums;
  for (const auto& [name, t] : out.tensors()) {
    delta_sums.emplace(name, Eigen::ArrayXd::Zero(t.size()));
  }
  for (std::size_t i = 1; i < sets.size(); ++i) {
    if (sets[i].names() != out.names()) {
      throw std::invalid_argument("average_parameters: tensor name sets differ");
    }
    for (auto& [name, t] : out.tensors()) {
      const Tensor& other = sets[i].at(name);
      if (other.shape() != t.shape()) {
        throw std::invalid_argument("average_parameters: shape mismatch for " + name);
      }
      delta_sums.at(name) += other.value() - t.value();
    }
  }
  const double inv = 1.0 / static_cast<double>(sets.size());
  for (auto& [name, t] : out.tensors()) t.value() += inv * delta_sums.at(name);
  return out;
}

}  // namespace spad
