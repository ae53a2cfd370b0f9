#include "uavmec/valuenet.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace uavmec {

namespace {

constexpr const char* kMagic = "uavmec-valuenet";

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("ValueNet needs at least input and output");
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("ValueNet layer sizes must be positive");
  }
}

}  // namespace

double GradientSet::max_abs() const {
  double m = 0.0;
  for (const auto& l : layers) {
    if (l.weight.size() > 0) m = std::max(m, l.weight.cwiseAbs().maxCoeff());
    if (l.bias.size() > 0) m = std::max(m, l.bias.cwiseAbs().maxCoeff());
  }
  return m;
}

ValueNet::ValueNet(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  check_sizes(sizes_);
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[i + 1], sizes_[i]),
                       Eigen::VectorXd::Zero(sizes_[i + 1])});
  }
}

ValueNet::ValueNet(std::vector<int> sizes, Rng& rng) : ValueNet(std::move(sizes)) {
  for (auto& layer : layers_) {
    const double fan = static_cast<double>(layer.weight.rows() + layer.weight.cols());
    std::uniform_real_distribution<double> init(-std::sqrt(6.0 / fan), std::sqrt(6.0 / fan));
    // Row-major fill keeps the draw order independent of Eigen's storage.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = init(rng);
    }
  }
}

std::size_t ValueNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd ValueNet::forward(std::span<const double> state) const {
  if (static_cast<int>(state.size()) != input_size()) {
    throw std::invalid_argument("ValueNet::forward: expected input of size " +
                                std::to_string(input_size()) + ", got " +
                                std::to_string(state.size()));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(state.data(), input_size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::VectorXd z = layers_[i].weight * a + layers_[i].bias;
    if (i + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd ValueNet::forward_batch(const Eigen::MatrixXd& states) const {
  if (states.rows() != input_size()) {
    throw std::invalid_argument("ValueNet::forward_batch: input dimension mismatch");
  }
  Eigen::MatrixXd a = states;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = layers_[i].weight * a;
    z.colwise() += layers_[i].bias;
    if (i + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

GradientSet ValueNet::backward(const Eigen::MatrixXd& states, std::span<const int> actions,
                               std::span<const double> targets) const {
  const Eigen::Index K = states.cols();
  if (states.rows() != input_size()) {
    throw std::invalid_argument("ValueNet::backward: input dimension mismatch");
  }
  if (K == 0 || actions.size() != static_cast<std::size_t>(K) ||
      targets.size() != static_cast<std::size_t>(K)) {
    throw std::invalid_argument("ValueNet::backward: batch sizes disagree or are empty");
  }

  // Keep every layer's activation for the backward sweep.
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers_.size() + 1);
  acts.push_back(states);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = layers_[i].weight * acts.back();
    z.colwise() += layers_[i].bias;
    if (i + 1 < layers_.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(output_size(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const int a = actions[static_cast<std::size_t>(k)];
    if (a < 0 || a >= output_size()) throw std::out_of_range("ValueNet::backward: bad action");
    delta(a, k) = (acts.back()(a, k) - targets[static_cast<std::size_t>(k)]) /
                  static_cast<double>(K);
  }

  GradientSet grads;
  grads.layers.resize(layers_.size());
  for (std::size_t i = layers_.size(); i-- > 0;) {
    grads.layers[i].weight = delta * acts[i].transpose();
    grads.layers[i].bias = delta.rowwise().sum();
    if (i > 0) {
      Eigen::MatrixXd upstream = layers_[i].weight.transpose() * delta;
      // Rectifier derivative: pass-through where the unit was active.
      delta = (acts[i].array() > 0.0).select(upstream, 0.0);
    }
  }
  return grads;
}

void ValueNet::sgd_update(const GradientSet& grads, double lambda) {
  if (grads.layers.size() != layers_.size()) {
    throw std::invalid_argument("ValueNet::sgd_update: gradient shape mismatch");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].weight -= lambda * grads.layers[i].weight;
    layers_[i].bias -= lambda * grads.layers[i].bias;
  }
}

bool ValueNet::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

// Layout:
//   uavmec-valuenet 1
//   <layer count L> <size_0> ... <size_L>
//   per layer: weights row-major, then biases, one value per line
void ValueNet::save(std::ostream& out) const {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << kMagic << " 1\n" << sizes_.size();
  for (int s : sizes_) out << ' ' << s;
  out << '\n';
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out << l.weight(r, c) << '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out << l.bias(r) << '\n';
  }
  out.precision(old_precision);
}

ValueNet ValueNet::load(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version >> count) || magic != kMagic || version != 1 || count < 2) {
    throw std::runtime_error("ValueNet::load: not a value-network checkpoint");
  }
  std::vector<int> sizes(count);
  for (auto& s : sizes) {
    if (!(in >> s)) throw std::runtime_error("ValueNet::load: truncated size header");
  }
  ValueNet net(sizes);
  // operator>> does not round-trip subnormals reliably, strtod does.
  std::string token;
  auto next = [&]() {
    if (!(in >> token)) throw std::runtime_error("ValueNet::load: truncated parameters");
    return std::strtod(token.c_str(), nullptr);
  };
  for (auto& l : net.layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = next();
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = next();
  }
  return net;
}

bool operator==(const ValueNet& a, const ValueNet& b) {
  if (a.sizes_ != b.sizes_) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    if (a.layers_[i].weight != b.layers_[i].weight || a.layers_[i].bias != b.layers_[i].bias) {
      return false;
    }
  }
  return true;
}

double loss(std::span<const double> predicted, std::span<const double> targets) {
  if (predicted.empty() || predicted.size() != targets.size()) {
    throw std::invalid_argument("loss: batches must be non-empty and of equal length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double d = targets[k] - predicted[k];
    sum += d * d;
  }
  return sum / (2.0 * static_cast<double>(predicted.size()));
}

void sync(ValueNet& target, const ValueNet& predicted) {
  if (!target.same_shape(predicted)) throw std::invalid_argument("sync: shape mismatch");
  target = predicted;
}

Eigen::MatrixXd to_batch(const std::vector<std::span<const double>>& states) {
  if (states.empty()) return {};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(states.front().size()),
                      static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].size() != states.front().size()) {
      throw std::invalid_argument("to_batch: ragged state vectors");
    }
    out.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(states[k].data(), static_cast<Eigen::Index>(states[k].size()));
  }
  return out;
}

}  // namespace uavmec
