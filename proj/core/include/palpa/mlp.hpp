#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace palpa::mlp {

/// Fixed 5-32-32-32-1 topology: three tanh hidden layers and a linear output.
inline constexpr std::array<int, 5> kLayerSizes{5, 32, 32, 32, 1};
inline constexpr int kLayers = 4;
inline constexpr int kInputs = kLayerSizes.front();

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// weights[l] is (out x in); inputs are laid out one sample per column.
template <typename Scalar>
struct Params {
  std::array<Matrix<Scalar>, kLayers> weights;
  std::array<Vector<Scalar>, kLayers> biases;

  static Params zeros();
  /// Glorot-uniform weights, zero biases.
  static Params glorot(std::uint64_t seed);

  std::size_t parameter_count() const;
  bool all_finite() const;

  template <typename Other>
  Params<Other> cast() const {
    Params<Other> out;
    for (int l = 0; l < kLayers; ++l) {
      out.weights[l] = weights[l].template cast<Other>();
      out.biases[l] = biases[l].template cast<Other>();
    }
    return out;
  }

  /// Flat view helpers used by the optimizer and gradient checks.
  Scalar& flat(std::size_t index);
  Scalar flat(std::size_t index) const;
};

template <typename Scalar>
RowVector<Scalar> forward(const Params<Scalar>& net, const Matrix<Scalar>& inputs);

/// Mean squared error over the columns of `inputs`; writes dLoss/dParams into `grad`.
template <typename Scalar>
Scalar mse_gradient(const Params<Scalar>& net, const Matrix<Scalar>& inputs,
                    const RowVector<Scalar>& targets, Params<Scalar>& grad);

/// Gradient of the scalar output with respect to one input vector.
template <typename Scalar>
Vector<Scalar> input_gradient(const Params<Scalar>& net, const Vector<Scalar>& input);

extern template struct Params<float>;
extern template struct Params<double>;

}  // namespace palpa::mlp
