#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "graphpinn/jet.hpp"
#include "graphpinn/tape.hpp"

namespace graphpinn {

enum class Activation { Relu, Sigmoid, SinSq, SinSqPlusX };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct ActivationJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// sigma(z), sigma'(z), sigma''(z). Relu uses step(0) = 0 and a zero second derivative.
ActivationJet activation_jet(Activation a, double z);
// sigma'''(z), needed when differentiating second-derivative jets in reverse.
double activation_third(Activation a, double z);

// Flat parameter vector, layer by layer: weights row-major (out x in), then biases.
using WeightGradient = std::vector<double>;

std::size_t parameter_count(std::span<const int> dims);

// Fully connected network; hidden layers share one activation, output layer is affine.
class Mlp {
 public:
  Mlp(std::vector<int> dims, Activation activation, std::uint64_t seed, std::vector<double> params);

  // Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(...)) weights, zero biases.
  static Mlp init(std::vector<int> dims, Activation activation, std::uint64_t seed);

  const std::vector<int>& dims() const noexcept { return dims_; }
  int input_arity() const noexcept { return dims_.front(); }
  int num_layers() const noexcept { return static_cast<int>(dims_.size()) - 1; }
  Activation activation() const noexcept { return activation_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return params_; }

  // Offsets of layer p's weight block and bias block inside parameters().
  std::size_t weight_offset(int layer) const { return offsets_[static_cast<std::size_t>(layer)]; }
  std::size_t bias_offset(int layer) const;

  double forward(std::span<const double> input) const;
  Jet forward_jet(std::span<const double> input) const;

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.dims_ == b.dims_ && a.activation_ == b.activation_ && a.seed_ == b.seed_ && a.params_ == b.params_;
  }

 private:
  std::vector<int> dims_;
  Activation activation_;
  std::uint64_t seed_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

// Sample coordinates for a batch; t is ignored by single-input networks.
struct InputBatch {
  std::vector<double> x;
  std::vector<double> t;

  std::size_t size() const noexcept { return x.size(); }
};

// Struct-of-arrays jets for a batch of samples.
struct JetBatch {
  std::vector<double> u;
  std::vector<double> du_dx;
  std::vector<double> d2u_dx2;
  std::vector<double> du_dt;

  std::size_t size() const noexcept { return u.size(); }
  Jet at(std::size_t s) const { return {u[s], du_dx[s], d2u_dx2[s], du_dt[s]}; }
};

// Layer intermediates kept by a jet forward pass for reverse accumulation.
class JetCache {
 public:
  JetCache();
  ~JetCache();
  JetCache(JetCache&&) noexcept;
  JetCache& operator=(JetCache&&) noexcept;

  struct Impl;

 private:
  friend JetBatch forward_jet_batch(const Mlp&, const InputBatch&, JetCache*);
  friend void backward_jet_batch(const Mlp&, const JetCache&, const JetBatch&, std::span<double>);
  std::unique_ptr<Impl> impl_;
};

std::vector<double> forward_batch(const Mlp& m, const InputBatch& in);
JetBatch forward_jet_batch(const Mlp& m, const InputBatch& in, JetCache* cache = nullptr);

// Adds d(loss)/d(params) to `grad`, given d(loss)/d(jet channel) for every
// sample of the cached forward pass. `cache` must come from the same network.
void backward_jet_batch(const Mlp& m, const JetCache& cache, const JetBatch& adjoint, std::span<double> grad);

// Records network evaluations as tape leaves so that a scalar loss built from
// them with Var arithmetic can be differentiated back to every weight.
class JetRecorder {
 public:
  JetRecorder();
  ~JetRecorder();
  JetRecorder(const JetRecorder&) = delete;
  JetRecorder& operator=(const JetRecorder&) = delete;

  Tape& tape() noexcept { return tape_; }

  std::vector<BasicJet<Var>> evaluate(const Mlp& net, const InputBatch& in);

  // Networks evaluated so far, in first-use order.
  std::vector<const Mlp*> networks() const;

  // d(loss)/d(params) for each requested network (zeros if never evaluated).
  std::vector<WeightGradient> gradients(const Var& loss, std::span<const Mlp* const> nets) const;

  // Forgets all recordings; buffers are kept for the next evaluation round.
  void clear();

 private:
  struct Record;
  Tape tape_;
  std::vector<std::unique_ptr<Record>> records_;
  std::size_t used_ = 0;
};

using LossProgram = std::function<Var(JetRecorder&)>;

// Exact gradient of a scalar built from `m`'s outputs. Throws std::invalid_argument
// if the program evaluates any other network.
WeightGradient loss_gradient(const Mlp& m, const LossProgram& program);

// Text checkpoint block; parameters in hexadecimal floating point for an exact round trip.
void write_mlp(std::ostream& out, const Mlp& m);
Mlp read_mlp(std::istream& in);

}  // namespace graphpinn
