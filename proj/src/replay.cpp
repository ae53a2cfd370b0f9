#include "uavmec/replay.hpp"

#include <algorithm>

namespace uavmec {

ReplayMemory::ReplayMemory(std::size_t capacity) : buffer_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayMemory: capacity must be positive");
}

void ReplayMemory::push(Transition t) {
  buffer_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % buffer_.size();
  fill_ = std::min(fill_ + 1, buffer_.size());
  ++pushes_;
}

const Transition& ReplayMemory::at(std::size_t i) const {
  if (i >= fill_) throw std::out_of_range("ReplayMemory::at");
  const std::size_t oldest = full() ? cursor_ : 0;
  return buffer_[(oldest + i) % buffer_.size()];
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t k, Rng& rng) const {
  const std::size_t n = fill_;
  if (k > n) throw std::invalid_argument("ReplayMemory: sample larger than contents");
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(j);
    }
  }
  return out;
}

}  // namespace uavmec
