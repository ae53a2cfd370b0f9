#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavmec/rng.hpp"

namespace uavmec {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Partial derivatives of the loss, one entry per network layer.
struct GradientSet {
  std::vector<DenseLayer> layers;

  double max_abs() const;
};

/// Fully connected Q-network: rectifier on hidden layers, identity on the
/// output. Columns of a batch matrix are samples.
class ValueNet {
 public:
  ValueNet() = default;
  /// `sizes` = {input, hidden..., output}. Weights are drawn uniformly in
  /// +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
  ValueNet(std::vector<int> sizes, Rng& rng);
  /// All-zero parameters.
  explicit ValueNet(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Eigen::VectorXd forward(std::span<const double> state) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& states) const;

  /// Gradient of J = 1/(2K) sum_k (target_k - Q(s_k, a_k))^2. Only the output
  /// of the taken action a_k carries loss.
  GradientSet backward(const Eigen::MatrixXd& states, std::span<const int> actions,
                       std::span<const double> targets) const;

  void sgd_update(const GradientSet& grads, double lambda);

  bool all_finite() const;
  bool same_shape(const ValueNet& other) const { return sizes_ == other.sizes_; }

  void save(std::ostream& out) const;
  static ValueNet load(std::istream& in);

  friend bool operator==(const ValueNet& a, const ValueNet& b);

 private:
  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
};

double loss(std::span<const double> predicted, std::span<const double> targets);

/// target := predicted, after a shape check.
void sync(ValueNet& target, const ValueNet& predicted);

Eigen::MatrixXd to_batch(const std::vector<std::span<const double>>& states);

}  // namespace uavmec
