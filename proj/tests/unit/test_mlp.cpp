#include <doctest.h>

#include <cmath>

#include "palpa/calibration.hpp"
#include "palpa/mlp.hpp"
#include "palpa/random.hpp"

using namespace palpa;
using namespace palpa::mlp;

namespace {

Matrix<double> random_inputs(SeqRng& rng, int n) {
  Matrix<double> x(kInputs, n);
  for (int j = 0; j < n; ++j) for (int i = 0; i < kInputs; ++i) x(i, j) = rng.uniform(-2, 2);
  return x;
}

Params<double> random_net(SeqRng& rng) {
  auto p = Params<double>::glorot(rng.next());
  for (int l = 0; l < kLayers; ++l) {
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) p.biases[l](i) = rng.uniform(-0.5, 0.5);
  }
  return p;
}

}  // namespace

TEST_CASE("layer shapes are 5-32-32-32-1") {
  const auto p = Params<float>::glorot(1);
  const std::array<std::pair<int, int>, 4> shapes{{{32, 5}, {32, 32}, {32, 32}, {1, 32}}};
  for (int l = 0; l < kLayers; ++l) {
    CHECK(p.weights[l].rows() == shapes[l].first);
    CHECK(p.weights[l].cols() == shapes[l].second);
    CHECK(p.biases[l].size() == shapes[l].first);
  }
  CHECK(p.parameter_count() == 32 * 5 + 32 + 2 * (32 * 32 + 32) + 32 + 1);
}

TEST_CASE("zero-weight network outputs its final bias") {
  CalibrationModel m;
  m.net.biases[kLayers - 1](0) = 0.123f;
  CHECK(mlp_forward(m, CalibFeatures{1, 2, 3, 0.5f, 0.5f}) == doctest::Approx(0.123f));
  CHECK(mlp_forward(m, CalibFeatures{-7, 0, 9, 0, 1}) == doctest::Approx(0.123f));
}

TEST_CASE("forward is repeatable and batch-consistent") {
  CalibrationModel m;
  m.net = Params<float>::glorot(3);
  const CalibFeatures f{12.5f, -0.03f, -0.01f, 0.25f, 0.75f};
  const float a = mlp_forward(m, f);
  CHECK(mlp_forward(m, f) == a);
  const std::vector<CalibFeatures> batch{f, f, f};
  // Batched and single paths sum in different orders.
  for (float v : mlp_forward_batch(m, batch)) CHECK(v == doctest::Approx(a).epsilon(1e-6));
}

TEST_CASE("analytic gradients match central differences (100 random pairs)") {
  SeqRng rng(77);
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    auto net = random_net(rng);
    const auto x = random_inputs(rng, 3);
    RowVector<double> t(3);
    for (int j = 0; j < 3; ++j) t(j) = rng.uniform(-1, 1);

    Params<double> grad = Params<double>::zeros();
    mse_gradient(net, x, t, grad);

    const double h = 1e-6;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < net.parameter_count(); ++k) {
      const double keep = net.flat(k);
      Params<double> scratch = Params<double>::zeros();
      net.flat(k) = keep + h;
      const double up = mse_gradient(net, x, t, scratch);
      net.flat(k) = keep - h;
      const double down = mse_gradient(net, x, t, scratch);
      net.flat(k) = keep;
      const double fd = (up - down) / (2 * h);
      num += (grad.flat(k) - fd) * (grad.flat(k) - fd);
      den += std::max(grad.flat(k) * grad.flat(k), fd * fd);
    }
    const double rel = std::sqrt(num / den);
    worst = std::max(worst, rel);
    REQUIRE(rel < 1e-4);
  }
  MESSAGE("worst relative gradient error " << worst);
}

TEST_CASE("input gradient matches central differences") {
  SeqRng rng(5);
  for (int pair = 0; pair < 20; ++pair) {
    const auto net = random_net(rng);
    Vector<double> x = random_inputs(rng, 1).col(0);
    const auto g = input_gradient(net, x);
    for (int i = 0; i < kInputs; ++i) {
      Vector<double> a = x, b = x;
      a(i) += 1e-6;
      b(i) -= 1e-6;
      const double fd = (forward(net, Matrix<double>(a))(0) - forward(net, Matrix<double>(b))(0)) / 2e-6;
      REQUIRE(g(i) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

namespace {
CalibrationRows linear_rows() {
  SeqRng rng(21);
  CalibrationRows rows;
  for (int i = 0; i < 512; ++i) {
    const float dh = static_cast<float>(rng.uniform(0, 50));
    rows.features.push_back({dh, static_cast<float>(-0.002 * dh), static_cast<float>(-0.001 * dh),
                             static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform())});
    rows.depths_mm.push_back(0.01f * dh);
  }
  return rows;
}
}  // namespace

TEST_CASE("full-batch training loss never increases at a small step size") {
  TrainConfig cfg;
  cfg.batch_size = 512;
  cfg.epochs = 300;
  cfg.learning_rate = 1e-4;
  TrainReport rep;
  train_mlp(linear_rows(), cfg, &rep);
  REQUIRE(rep.epoch_loss.size() == 300);
  for (std::size_t e = 1; e < rep.epoch_loss.size(); ++e) {
    CAPTURE(e);
    REQUIRE(rep.epoch_loss[e] <= rep.epoch_loss[e - 1] * (1.0 + 1e-6));
  }
}

TEST_CASE("full-batch training loss falls between checkpoints at the default step size") {
  TrainConfig cfg;
  cfg.batch_size = 512;
  cfg.epochs = 60;
  TrainReport rep;
  train_mlp(linear_rows(), cfg, &rep);
  REQUIRE(rep.epoch_loss.size() == 60);
  // Momentum overshoots at lr 1e-3, so single epochs may tick up; compare every tenth.
  for (std::size_t e = 10; e < rep.epoch_loss.size(); e += 10) {
    CAPTURE(e);
    CHECK(rep.epoch_loss[e] < rep.epoch_loss[e - 10]);
  }
  CHECK(rep.epoch_loss.back() < 0.2 * rep.epoch_loss.front());
}
