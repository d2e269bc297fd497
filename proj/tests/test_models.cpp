#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "asgd/models.hpp"

using namespace asgd;

namespace {

ModelSpec quad(double center = 2.0, double spread = 1.0, double wd = 0.0) {
  ModelSpec s;
  s.kind = ModelKind::Quadratic;
  s.input_dim = 4;
  s.quad_center = center;
  s.quad_spread = spread;
  s.weight_decay = wd;
  return s;
}

ModelSpec logistic() {
  ModelSpec s;
  s.kind = ModelKind::Logistic;
  s.input_dim = 8;
  return s;
}

ModelSpec mlp() {
  ModelSpec s;
  s.kind = ModelKind::Mlp1;
  s.input_dim = 4;
  s.hidden_dim = 8;
  return s;
}

double max_rel_err(const ParamVector& a, const ParamVector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("make_synthetic is deterministic in the seed") {
  for (const ModelSpec& spec : {quad(), logistic(), mlp()}) {
    RngStream r1(99, "data"), r2(99, "data");
    const Dataset a = make_synthetic(spec, 128, r1);
    const Dataset b = make_synthetic(spec, 128, r2);
    REQUIRE(a.features == b.features);
    REQUIRE(a.targets == b.targets);
  }
}

TEST_CASE("quadratic identity design records L = 1") {
  RngStream rng(7, "data");
  const ModelSpec spec = quad();
  const Dataset data = make_synthetic(spec, 64, rng);
  const QuadraticConstants c = quadratic_constants(spec, data);
  CHECK(c.lipschitz == 1.0);
  CHECK(c.sigma_sq > 0.0);  // nonzero spread
  // optimum is the target mean; gradient vanishes there
  const ParamVector g = grad(spec, c.optimum, data, full_batch(data));
  for (const double x : g.values) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("loss pinned examples") {
  // exact solution of a spread-0 quadratic has zero loss
  RngStream rng(1, "data");
  const ModelSpec s0 = quad(2.0, 0.0);
  const Dataset d0 = make_synthetic(s0, 16, rng);
  const ParamVector at_min(std::vector<double>(4, 2.0), s0.layout());
  CHECK(loss(s0, at_min, d0, full_batch(d0)) == 0.0);

  // weight decay vanishes at the origin
  const ModelSpec swd = quad(2.0, 1.0, 0.125);
  RngStream rng2(1, "data");
  const Dataset dwd = make_synthetic(swd, 16, rng2);
  ModelSpec plain = swd;
  plain.weight_decay = 0.0;
  const ParamVector origin = ParamVector::zeros(4);
  CHECK(loss(swd, origin, dwd, full_batch(dwd)) ==
        loss(plain, origin, dwd, full_batch(dwd)));

  // logistic at theta = 0 prices every sample at ln 2
  RngStream rng3(3, "data");
  const ModelSpec sl = logistic();
  const Dataset dl = make_synthetic(sl, 32, rng3);
  CHECK(loss(sl, ParamVector::zeros(8), dl, full_batch(dl)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("grad pinned examples") {
  // quadratic with all targets zero: grad(theta) = theta
  const ModelSpec s = quad(0.0, 0.0);
  RngStream rng(5, "data");
  const Dataset d = make_synthetic(s, 8, rng);
  ParamVector theta = ParamVector::zeros(4);
  theta[0] = 1.0;
  const ParamVector g = grad(s, theta, d, full_batch(d));
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);

  // zero gradient at the exact minimum
  const ParamVector at_min(std::vector<double>(4, 0.0), s.layout());
  const ParamVector g0 = grad(s, at_min, d, full_batch(d));
  for (const double x : g0.values) CHECK(x == 0.0);
}

TEST_CASE("grad matches fd_grad on random probes, every model kind") {
  int kind_idx = 0;
  for (const ModelSpec& spec : {quad(2.0, 1.0, 0.01), logistic(), mlp()}) {
    RngStream data_rng(40 + kind_idx, "data");
    const Dataset data = make_synthetic(spec, 64, data_rng);
    RngStream rng(50 + kind_idx, "probe");
    for (int probe = 0; probe < 10; ++probe) {
      ParamVector theta(std::vector<double>(spec.param_dim()), spec.layout());
      for (double& x : theta.values) x = rng.normal();
      Batch batch;
      const std::size_t b = 1 + static_cast<std::size_t>(rng.uniform_below(16));
      for (std::size_t i = 0; i < b; ++i)
        batch.indices.push_back(static_cast<std::size_t>(rng.uniform_below(data.size())));
      const ParamVector g = grad(spec, theta, data, batch);
      const ParamVector fd = fd_grad(spec, theta, data, batch, 1e-5);
      CHECK(max_rel_err(g, fd) < 1e-5);
    }
    ++kind_idx;
  }
}

TEST_CASE("fd_grad quadratic absolute agreement and evenness in h") {
  const ModelSpec s = quad();
  RngStream rng(6, "data");
  const Dataset d = make_synthetic(s, 32, rng);
  ParamVector theta(std::vector<double>{0.5, -1.0, 2.0, 0.25}, s.layout());
  const Batch batch = full_batch(d);
  const ParamVector g = grad(s, theta, d, batch);
  const ParamVector fd = fd_grad(s, theta, d, batch, 1e-6);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(g[i] - fd[i]) < 1e-6);

  const ParamVector fd_neg = fd_grad(s, theta, d, batch, -1e-6);
  for (std::size_t i = 0; i < fd.size(); ++i) CHECK(fd[i] == fd_neg[i]);
}

TEST_CASE("fd_grad is zero in coordinates the loss ignores") {
  // with W2[h] = 0 the loss does not depend on W1 row h
  const ModelSpec s = mlp();
  RngStream rng(8, "data");
  const Dataset d = make_synthetic(s, 16, rng);
  ParamVector theta(std::vector<double>(s.param_dim(), 0.0), s.layout());
  const std::size_t n1 = s.hidden_dim * s.input_dim;
  for (std::size_t i = 0; i < n1; ++i) theta[i] = 0.3;
  theta[n1 + 0] = 1.0;  // only hidden unit 0 reaches the output
  const ParamVector fd = fd_grad(s, theta, d, full_batch(d), 1e-5);
  for (std::size_t h = 1; h < s.hidden_dim; ++h)
    for (std::size_t j = 0; j < s.input_dim; ++j)
      CHECK(fd[h * s.input_dim + j] == 0.0);
}

TEST_CASE("full-batch gradients are deterministic (sigma = 0)") {
  for (const ModelSpec& spec : {quad(), logistic(), mlp()}) {
    RngStream data_rng(11, "data");
    const Dataset data = make_synthetic(spec, 32, data_rng);
    RngStream init_rng(12, "init");
    const ParamVector theta = init_params(spec, init_rng);
    const Batch batch = full_batch(data);
    const ParamVector g1 = grad(spec, theta, data, batch);
    const ParamVector g2 = grad(spec, theta, data, batch);
    REQUIRE(g1.values == g2.values);
  }
}

TEST_CASE("loss is non-negative for logistic and noiseless quadratic") {
  RngStream rng(13, "probe");
  for (const ModelSpec& spec : {quad(), logistic()}) {
    RngStream data_rng(14, "data");
    const Dataset data = make_synthetic(spec, 32, data_rng);
    for (int probe = 0; probe < 25; ++probe) {
      ParamVector theta(std::vector<double>(spec.param_dim()), spec.layout());
      for (double& x : theta.values) x = 3.0 * rng.normal();
      CHECK(loss(spec, theta, data, full_batch(data)) >= 0.0);
    }
  }
}

TEST_CASE("quadratic per-call noise has the declared magnitude") {
  ModelSpec s = quad(2.0, 0.0);
  s.noise_sigma = 1.0;
  RngStream data_rng(15, "data");
  const Dataset data = make_synthetic(s, 16, data_rng);
  const ParamVector at_min(std::vector<double>(4, 2.0), s.layout());
  Batch batch;
  batch.indices = {0, 1, 2, 3};  // B = 4
  RngStream noise(16, "noise");
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const ParamVector g = grad(s, at_min, data, batch, &noise);
    const double norm = l2_norm(g);
    sq += norm * norm;
  }
  // E||g - grad f||^2 = sigma^2 / B at the noise-free optimum
  CHECK(sq / n == doctest::Approx(1.0 / 4.0).epsilon(0.05));
}

TEST_CASE("dataset csv round trip") {
  RngStream rng(17, "data");
  const Dataset data = make_synthetic(logistic(), 24, rng);
  const std::string path =
      (std::filesystem::temp_directory_path() / "asgd_test_dataset.csv").string();
  save_dataset_csv(data, path);
  const Dataset back = load_dataset_csv(path);
  REQUIRE(back.input_dim == data.input_dim);
  REQUIRE(back.features == data.features);
  REQUIRE(back.targets == data.targets);
  std::filesystem::remove(path);
}

TEST_CASE("accuracy is defined for logistic only") {
  RngStream rng(18, "data");
  const ModelSpec sl = logistic();
  const Dataset dl = make_synthetic(sl, 64, rng);
  CHECK(accuracy(sl, ParamVector::zeros(8), dl).has_value());
  RngStream rng2(18, "data");
  const ModelSpec sq = quad();
  const Dataset dq = make_synthetic(sq, 16, rng2);
  CHECK_FALSE(accuracy(sq, ParamVector::zeros(4), dq).has_value());
}

TEST_CASE("dimension mismatches are rejected") {
  RngStream rng(19, "data");
  const ModelSpec s = quad();
  const Dataset d = make_synthetic(s, 8, rng);
  const ParamVector bad = ParamVector::zeros(7);
  CHECK_THROWS_AS(loss(s, bad, d, full_batch(d)), DimensionMismatch);
  CHECK_THROWS_AS(grad(s, bad, d, full_batch(d)), DimensionMismatch);
  Batch out_of_range;
  out_of_range.indices = {99};
  CHECK_THROWS_AS(loss(s, ParamVector::zeros(4), d, out_of_range), DimensionMismatch);
}
