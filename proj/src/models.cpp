#include "asgd/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "asgd/errors.hpp"

namespace asgd {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Quadratic: return "quadratic";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Mlp1: return "mlp1";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "quadratic") return ModelKind::Quadratic;
  if (name == "logistic") return ModelKind::Logistic;
  if (name == "mlp1") return ModelKind::Mlp1;
  throw ConfigError("unknown model kind '" + name + "'", "model");
}

std::size_t ModelSpec::param_dim() const {
  switch (kind) {
    case ModelKind::Quadratic:
    case ModelKind::Logistic: return input_dim;
    case ModelKind::Mlp1: return hidden_dim * input_dim + hidden_dim;
  }
  return 0;
}

LayerLayout ModelSpec::layout() const {
  if (kind == ModelKind::Mlp1)
    return LayerLayout({hidden_dim * input_dim, hidden_dim});
  return LayerLayout::single(input_dim);
}

void ModelSpec::validate() const {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1", "input_dim");
  if (kind == ModelKind::Mlp1 && hidden_dim < 1)
    throw ConfigError("hidden_dim must be >= 1", "hidden_dim");
  if (kind == ModelKind::Mlp1 && output_dim != 1)
    throw ConfigError("mlp1 supports output_dim = 1", "output_dim");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
    throw ConfigError("weight_decay must be finite and >= 0", "weight_decay");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ConfigError("noise_sigma must be finite and >= 0", "noise_sigma");
}

Batch full_batch(const Dataset& data) {
  Batch b;
  b.indices.resize(data.size());
  std::iota(b.indices.begin(), b.indices.end(), std::size_t{0});
  return b;
}

namespace {

// log(1 + exp(t)) without overflow
double softplus(double t) {
  if (t > 30.0) return t;
  if (t < -30.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

struct Mlp1View {
  // theta = [W1 (hidden x input, row-major) | W2 (hidden)]
  const double* w1;
  const double* w2;
  std::size_t din, dh;

  Mlp1View(const ParamVector& theta, const ModelSpec& spec)
      : w1(theta.values.data()),
        w2(theta.values.data() + spec.hidden_dim * spec.input_dim),
        din(spec.input_dim),
        dh(spec.hidden_dim) {}

  double forward(const double* x, std::vector<double>& hidden) const {
    hidden.resize(dh);
    double out = 0.0;
    for (std::size_t h = 0; h < dh; ++h) {
      double z = 0.0;
      const double* row = w1 + h * din;
      for (std::size_t j = 0; j < din; ++j) z += row[j] * x[j];
      hidden[h] = std::tanh(z);
      out += w2[h] * hidden[h];
    }
    return out;
  }
};

ParamVector mlp1_teacher_params(const ModelSpec& spec, RngStream& rng) {
  const double lim1 = 1.0 / std::sqrt(static_cast<double>(spec.input_dim));
  const double lim2 = 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim));
  std::vector<double> theta(spec.param_dim());
  const std::size_t n1 = spec.hidden_dim * spec.input_dim;
  for (std::size_t i = 0; i < n1; ++i)
    theta[i] = spec.teacher_scale * lim1 * (2.0 * rng.uniform() - 1.0);
  for (std::size_t i = n1; i < theta.size(); ++i)
    theta[i] = spec.teacher_scale * lim2 * (2.0 * rng.uniform() - 1.0);
  return ParamVector(std::move(theta), spec.layout());
}

}  // namespace

Dataset make_synthetic(const ModelSpec& spec, std::size_t m, RngStream& rng) {
  if (m < 1) throw ConfigError("dataset size M must be >= 1", "M");
  spec.validate();
  Dataset data;
  data.input_dim = spec.input_dim;
  data.features.resize(m * spec.input_dim);
  data.targets.resize(m);

  switch (spec.kind) {
    case ModelKind::Quadratic:
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < spec.input_dim; ++j)
          data.features[i * spec.input_dim + j] =
              spec.quad_center + spec.quad_spread * rng.normal();
        data.targets[i] = 0.0;
      }
      break;
    case ModelKind::Logistic:
      for (std::size_t i = 0; i < m; ++i) {
        const double y = rng.uniform() < 0.5 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < spec.input_dim; ++j)
          data.features[i * spec.input_dim + j] = rng.normal();
        data.features[i * spec.input_dim] += y * spec.separation * 0.5;
        data.targets[i] = y;
      }
      break;
    case ModelKind::Mlp1: {
      const ParamVector teacher = mlp1_teacher_params(spec, rng);
      const Mlp1View view(teacher, spec);
      std::vector<double> hidden;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < spec.input_dim; ++j)
          data.features[i * spec.input_dim + j] = rng.normal();
        data.targets[i] =
            view.forward(data.row(i), hidden) + spec.target_noise * rng.normal();
      }
      break;
    }
  }
  return data;
}

ParamVector init_params(const ModelSpec& spec, RngStream& rng) {
  if (spec.kind != ModelKind::Mlp1)
    return ParamVector(std::vector<double>(spec.param_dim(), 0.0), spec.layout());
  const double lim1 = 1.0 / std::sqrt(static_cast<double>(spec.input_dim));
  const double lim2 = 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim));
  std::vector<double> theta(spec.param_dim());
  const std::size_t n1 = spec.hidden_dim * spec.input_dim;
  for (std::size_t i = 0; i < n1; ++i) theta[i] = lim1 * (2.0 * rng.uniform() - 1.0);
  for (std::size_t i = n1; i < theta.size(); ++i) theta[i] = lim2 * (2.0 * rng.uniform() - 1.0);
  return ParamVector(std::move(theta), spec.layout());
}

static void check_batch(const Dataset& data, const Batch& batch) {
  if (batch.indices.empty()) throw DimensionMismatch("batch must contain at least one sample");
  for (const std::size_t i : batch.indices)
    if (i >= data.size()) throw DimensionMismatch("batch index out of range");
}

double loss(const ModelSpec& spec, const ParamVector& theta, const Dataset& data,
            const Batch& batch) {
  if (theta.size() != spec.param_dim())
    throw DimensionMismatch("loss: theta dimension does not match model");
  if (data.input_dim != spec.input_dim)
    throw DimensionMismatch("loss: dataset dimension does not match model");
  check_batch(data, batch);

  const double inv_b = 1.0 / static_cast<double>(batch.indices.size());
  double acc = 0.0;
  switch (spec.kind) {
    case ModelKind::Quadratic:
      for (const std::size_t i : batch.indices) {
        const double* x = data.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < spec.input_dim; ++j) {
          const double e = theta[j] - x[j];
          s += e * e;
        }
        acc += 0.5 * s;
      }
      break;
    case ModelKind::Logistic:
      for (const std::size_t i : batch.indices) {
        const double* x = data.row(i);
        double z = 0.0;
        for (std::size_t j = 0; j < spec.input_dim; ++j) z += theta[j] * x[j];
        acc += softplus(-data.targets[i] * z);
      }
      break;
    case ModelKind::Mlp1: {
      const Mlp1View view(theta, spec);
      std::vector<double> hidden;
      for (const std::size_t i : batch.indices) {
        const double e = view.forward(data.row(i), hidden) - data.targets[i];
        acc += 0.5 * e * e;
      }
      break;
    }
  }
  double total = acc * inv_b;
  if (spec.weight_decay > 0.0) {
    double sq = 0.0;
    for (const double t : theta.values) sq += t * t;
    total += 0.5 * spec.weight_decay * sq;
  }
  return total;
}

ParamVector grad(const ModelSpec& spec, const ParamVector& theta, const Dataset& data,
                 const Batch& batch, RngStream* noise_rng) {
  if (theta.size() != spec.param_dim())
    throw DimensionMismatch("grad: theta dimension does not match model");
  if (data.input_dim != spec.input_dim)
    throw DimensionMismatch("grad: dataset dimension does not match model");
  check_batch(data, batch);

  const std::size_t b = batch.indices.size();
  const double inv_b = 1.0 / static_cast<double>(b);
  ParamVector g = ParamVector::zeros_like(theta);
  g.layout = theta.layout;

  switch (spec.kind) {
    case ModelKind::Quadratic:
      for (const std::size_t i : batch.indices) {
        const double* x = data.row(i);
        for (std::size_t j = 0; j < spec.input_dim; ++j) g[j] += theta[j] - x[j];
      }
      for (double& v : g.values) v *= inv_b;
      if (spec.noise_sigma > 0.0 && noise_rng != nullptr) {
        // batch-mean noise equal in law to per-sample noise of size sigma
        const double scale =
            spec.noise_sigma /
            std::sqrt(static_cast<double>(spec.input_dim) * static_cast<double>(b));
        for (double& v : g.values) v += scale * noise_rng->normal();
      }
      break;
    case ModelKind::Logistic:
      for (const std::size_t i : batch.indices) {
        const double* x = data.row(i);
        const double y = data.targets[i];
        double z = 0.0;
        for (std::size_t j = 0; j < spec.input_dim; ++j) z += theta[j] * x[j];
        const double w = -y * sigmoid(-y * z);
        for (std::size_t j = 0; j < spec.input_dim; ++j) g[j] += w * x[j];
      }
      for (double& v : g.values) v *= inv_b;
      break;
    case ModelKind::Mlp1: {
      const Mlp1View view(theta, spec);
      const std::size_t n1 = spec.hidden_dim * spec.input_dim;
      std::vector<double> hidden;
      for (const std::size_t i : batch.indices) {
        const double* x = data.row(i);
        const double e = view.forward(x, hidden) - data.targets[i];
        for (std::size_t h = 0; h < spec.hidden_dim; ++h) {
          g[n1 + h] += e * hidden[h];
          const double dh = e * view.w2[h] * (1.0 - hidden[h] * hidden[h]);
          double* row = g.values.data() + h * spec.input_dim;
          for (std::size_t j = 0; j < spec.input_dim; ++j) row[j] += dh * x[j];
        }
      }
      for (double& v : g.values) v *= inv_b;
      break;
    }
  }
  if (spec.weight_decay > 0.0)
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += spec.weight_decay * theta[j];
  return g;
}

ParamVector fd_grad(const ModelSpec& spec, const ParamVector& theta, const Dataset& data,
                    const Batch& batch, double h) {
  if (!(h > 0.0)) h = -h;
  if (h == 0.0) throw DimensionMismatch("fd_grad: h must be nonzero");
  ParamVector out = ParamVector::zeros_like(theta);
  ParamVector probe = theta;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double keep = probe[j];
    probe[j] = keep + h;
    const double up = loss(spec, probe, data, batch);
    probe[j] = keep - h;
    const double down = loss(spec, probe, data, batch);
    probe[j] = keep;
    out[j] = (up - down) / (2.0 * h);
  }
  return out;
}

std::optional<double> accuracy(const ModelSpec& spec, const ParamVector& theta,
                               const Dataset& data) {
  if (spec.kind != ModelKind::Logistic) return std::nullopt;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* x = data.row(i);
    double z = 0.0;
    for (std::size_t j = 0; j < spec.input_dim; ++j) z += theta[j] * x[j];
    if ((z >= 0.0 && data.targets[i] > 0.0) || (z < 0.0 && data.targets[i] < 0.0)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

QuadraticConstants quadratic_constants(const ModelSpec& spec, const Dataset& data) {
  if (spec.kind != ModelKind::Quadratic)
    throw CannotCheck("analytic constants are only available for the quadratic model");
  QuadraticConstants out;
  out.lipschitz = 1.0 + spec.weight_decay;

  const std::size_t m = data.size();
  std::vector<double> mean(spec.input_dim, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < spec.input_dim; ++j) mean[j] += data.row(i)[j];
  for (double& v : mean) v /= static_cast<double>(m);

  double spread = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < spec.input_dim; ++j) {
      const double e = data.row(i)[j] - mean[j];
      spread += e * e;
    }
  spread /= static_cast<double>(m);
  out.sigma_sq = spread + spec.noise_sigma * spec.noise_sigma;

  std::vector<double> opt = mean;
  if (spec.weight_decay > 0.0)
    for (double& v : opt) v /= (1.0 + spec.weight_decay);
  out.optimum = ParamVector(std::move(opt), spec.layout());
  out.f_star = loss(spec, out.optimum, data, full_batch(data));
  return out;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (std::size_t j = 0; j < data.input_dim; ++j) file << 'f' << j << ',';
  file << "target\n";
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.input_dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.row(i)[j]);
      file << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", data.targets[i]);
    file << buf << '\n';
  }
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(file, line)) throw std::runtime_error("empty dataset file '" + path + "'");
  const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (cols < 2) throw std::runtime_error("dataset file needs feature and target columns");

  Dataset data;
  data.input_dim = cols - 1;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != cols) throw std::runtime_error("ragged row in dataset file");
    for (std::size_t j = 0; j + 1 < cols; ++j) data.features.push_back(vals[j]);
    data.targets.push_back(vals.back());
  }
  if (data.targets.empty()) throw std::runtime_error("dataset file has no rows");
  return data;
}

}  // namespace asgd
