#include "palpa/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "palpa/random.hpp"

namespace palpa::mlp {

template <typename Scalar>
Params<Scalar> Params<Scalar>::zeros() {
  Params p;
  for (int l = 0; l < kLayers; ++l) {
    p.weights[l] = Matrix<Scalar>::Zero(kLayerSizes[l + 1], kLayerSizes[l]);
    p.biases[l] = Vector<Scalar>::Zero(kLayerSizes[l + 1]);
  }
  return p;
}

template <typename Scalar>
Params<Scalar> Params<Scalar>::glorot(std::uint64_t seed) {
  Params p = zeros();
  SeqRng rng(seed);
  for (int l = 0; l < kLayers; ++l) {
    const double limit = std::sqrt(6.0 / (kLayerSizes[l] + kLayerSizes[l + 1]));
    auto& w = p.weights[l];
    // row-major fill so the draw order is independent of storage order
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
      }
    }
  }
  return p;
}

template <typename Scalar>
std::size_t Params<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < kLayers; ++l) n += weights[l].size() + biases[l].size();
  return n;
}

template <typename Scalar>
bool Params<Scalar>::all_finite() const {
  for (int l = 0; l < kLayers; ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

template <typename Scalar>
Scalar& Params<Scalar>::flat(std::size_t index) {
  for (int l = 0; l < kLayers; ++l) {
    const auto nw = static_cast<std::size_t>(weights[l].size());
    if (index < nw) return weights[l].data()[index];
    index -= nw;
    const auto nb = static_cast<std::size_t>(biases[l].size());
    if (index < nb) return biases[l].data()[index];
    index -= nb;
  }
  throw std::out_of_range("parameter index out of range");
}

template <typename Scalar>
Scalar Params<Scalar>::flat(std::size_t index) const {
  return const_cast<Params*>(this)->flat(index);
}

template <typename Scalar>
RowVector<Scalar> forward(const Params<Scalar>& net, const Matrix<Scalar>& inputs) {
  Matrix<Scalar> a = inputs;
  for (int l = 0; l < kLayers - 1; ++l) {
    Matrix<Scalar> z = net.weights[l] * a;
    z.colwise() += net.biases[l];
    a = z.array().tanh().matrix();
  }
  RowVector<Scalar> out = net.weights[kLayers - 1] * a;
  out.array() += net.biases[kLayers - 1](0);
  return out;
}

template <typename Scalar>
Scalar mse_gradient(const Params<Scalar>& net, const Matrix<Scalar>& inputs,
                    const RowVector<Scalar>& targets, Params<Scalar>& grad) {
  const Eigen::Index n = inputs.cols();
  std::array<Matrix<Scalar>, kLayers> act;  // act[l] is the input to layer l
  act[0] = inputs;
  for (int l = 0; l < kLayers - 1; ++l) {
    Matrix<Scalar> z = net.weights[l] * act[l];
    z.colwise() += net.biases[l];
    act[l + 1] = z.array().tanh().matrix();
  }
  RowVector<Scalar> out = net.weights[kLayers - 1] * act[kLayers - 1];
  out.array() += net.biases[kLayers - 1](0);

  const RowVector<Scalar> err = out - targets;
  const Scalar loss = err.squaredNorm() / static_cast<Scalar>(n);

  grad = Params<Scalar>::zeros();
  Matrix<Scalar> delta = err * (Scalar(2) / static_cast<Scalar>(n));
  for (int l = kLayers - 1; l >= 0; --l) {
    grad.weights[l].noalias() = delta * act[l].transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Matrix<Scalar> back = net.weights[l].transpose() * delta;
    delta = back.array() * (Scalar(1) - act[l].array().square());
  }
  return loss;
}

template <typename Scalar>
Vector<Scalar> input_gradient(const Params<Scalar>& net, const Vector<Scalar>& input) {
  std::array<Vector<Scalar>, kLayers> act;
  act[0] = input;
  for (int l = 0; l < kLayers - 1; ++l) {
    act[l + 1] = (net.weights[l] * act[l] + net.biases[l]).array().tanh().matrix();
  }
  RowVector<Scalar> g = net.weights[kLayers - 1];
  for (int l = kLayers - 2; l >= 0; --l) {
    const RowVector<Scalar> pre =
        g.array() * (Scalar(1) - act[l + 1].array().square()).transpose();
    g = pre * net.weights[l];
  }
  return g.transpose();
}

template struct Params<float>;
template struct Params<double>;

template RowVector<float> forward(const Params<float>&, const Matrix<float>&);
template RowVector<double> forward(const Params<double>&, const Matrix<double>&);
template float mse_gradient(const Params<float>&, const Matrix<float>&, const RowVector<float>&,
                            Params<float>&);
template double mse_gradient(const Params<double>&, const Matrix<double>&,
                             const RowVector<double>&, Params<double>&);
template Vector<float> input_gradient(const Params<float>&, const Vector<float>&);
template Vector<double> input_gradient(const Params<double>&, const Vector<double>&);

}  // namespace palpa::mlp
