#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "uavmec/rng.hpp"

namespace uavmec {

struct Transition {
  std::vector<double> state;
  int action = 0;  // flat id
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

/// Fixed-capacity ring of transitions. Once full, each insertion overwrites
/// the oldest record.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);

  std::size_t capacity() const { return buffer_.size(); }
  std::size_t size() const { return fill_; }
  bool full() const { return fill_ == buffer_.size(); }
  /// Total insertions since construction.
  std::size_t pushes() const { return pushes_; }

  /// `i` counts from the oldest surviving record.
  const Transition& at(std::size_t i) const;

  /// K distinct slot indices drawn uniformly (Floyd's algorithm).
  std::vector<std::size_t> sample_indices(std::size_t k, Rng& rng) const;
  const Transition& slot(std::size_t physical) const { return buffer_.at(physical); }

 private:
  std::vector<Transition> buffer_;
  std::size_t cursor_ = 0;
  std::size_t fill_ = 0;
  std::size_t pushes_ = 0;
};

}  // namespace uavmec
