#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "asgd/param_vector.hpp"
#include "asgd/rng.hpp"

namespace asgd {

enum class ModelKind { Quadratic, Logistic, Mlp1 };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Analytic training problems. All gradients are hand-written and checked
// against central finite differences in the test suite.
//
//   quadratic: F(theta; i) = 1/2 ||theta - x_i||^2, identity design rows.
//              Optional per-call Gaussian gradient noise of total standard
//              deviation noise_sigma per sample (the known variance bound).
//   logistic:  binary log-loss on two Gaussian clusters, labels in {-1,+1}.
//   mlp1:      one tanh hidden layer, linear scalar output, squared error
//              against targets from a fixed teacher network. Two layout
//              layers (W1, W2), so layer-wise Gap is exercised.
struct ModelSpec {
  ModelKind kind = ModelKind::Quadratic;
  std::size_t input_dim = 4;
  std::size_t output_dim = 1;
  std::size_t hidden_dim = 8;   // mlp1 only
  double weight_decay = 0.0;
  double noise_sigma = 0.0;     // quadratic only

  // synthetic-data knobs
  double quad_center = 2.0;     // quadratic: targets cluster around center * ones
  double quad_spread = 1.0;     // quadratic: target scatter (0 => deterministic optimum)
  double separation = 4.0;      // logistic: cluster separation in units of cluster std
  double teacher_scale = 3.0;   // mlp1: teacher weight amplitude multiplier
  double target_noise = 0.1;    // mlp1: additive target noise

  std::size_t param_dim() const;
  LayerLayout layout() const;
  void validate() const;
};

struct Dataset {
  std::size_t input_dim = 0;
  std::vector<double> features;  // M x input_dim, row-major
  std::vector<double> targets;   // M

  std::size_t size() const { return targets.size(); }
  const double* row(std::size_t i) const { return features.data() + i * input_dim; }
};

struct Batch {
  std::vector<std::size_t> indices;
};

Batch full_batch(const Dataset& data);

Dataset make_synthetic(const ModelSpec& spec, std::size_t m, RngStream& rng);

// Initial parameters: zeros for quadratic/logistic; uniform +-1/sqrt(fan_in)
// per layer for mlp1 (drawn from rng).
ParamVector init_params(const ModelSpec& spec, RngStream& rng);

// Mean per-sample loss over the batch plus (lambda/2)||theta||^2.
double loss(const ModelSpec& spec, const ParamVector& theta, const Dataset& data,
            const Batch& batch);

// Exact gradient of loss including the weight-decay term. For quadratic with
// noise_sigma > 0 and a non-null rng, fresh Gaussian noise with
// E||noise||^2 = noise_sigma^2 / B is added to the batch-mean gradient
// (equivalent in law to per-sample noise of magnitude noise_sigma).
ParamVector grad(const ModelSpec& spec, const ParamVector& theta, const Dataset& data,
                 const Batch& batch, RngStream* noise_rng = nullptr);

// Central finite differences of loss, step h per coordinate.
ParamVector fd_grad(const ModelSpec& spec, const ParamVector& theta, const Dataset& data,
                    const Batch& batch, double h);

// Classification accuracy; empty for regression-style models.
std::optional<double> accuracy(const ModelSpec& spec, const ParamVector& theta,
                               const Dataset& data);

// Analytic constants for the quadratic model (used by the convergence-bound
// checks): L of the full objective, the per-sample gradient variance bound,
// the optimum, and f(theta*).
struct QuadraticConstants {
  double lipschitz = 0.0;
  double sigma_sq = 0.0;
  ParamVector optimum;
  double f_star = 0.0;
};
QuadraticConstants quadratic_constants(const ModelSpec& spec, const Dataset& data);

void save_dataset_csv(const Dataset& data, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

}  // namespace asgd
