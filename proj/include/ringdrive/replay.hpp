#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <vector>

#include "ringdrive/affordance.hpp"

namespace ringdrive {

enum class TransitionSource { Safe, Collision };

// One stored decision. Collision-or-override records carry no successor
// state: their training target is the raw reward with no bootstrap.
struct Transition {
  std::array<double, kAffordanceSize> state{};
  int action = 0;
  double reward = 0.0;
  bool has_next = false;
  std::array<double, kAffordanceSize> next_state{};
  TransitionSource source = TransitionSource::Safe;
};

// Bounded FIFO: once full, each push overwrites the oldest entry.
class FifoBuffer {
 public:
  explicit FifoBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(const Transition& t) {
    if (items_.size() < capacity_) {
      items_.push_back(t);
    } else {
      items_[head_] = t;
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  // Index 0 is the oldest entry still stored.
  const Transition& operator[](std::size_t i) const {
    return items_[(head_ + i) % items_.size()];
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> items_;
};

struct ReplayBuffers {
  FifoBuffer safe;
  FifoBuffer collision;

  ReplayBuffers(std::size_t safe_capacity, std::size_t collision_capacity)
      : safe(safe_capacity), collision(collision_capacity) {}
};

// Uniform minibatch of n transitions: round(n * collision_fraction) drawn
// from the collision buffer (capped at its size, with replacement), the rest
// from the safe buffer. The safe buffer must not be empty.
std::vector<const Transition*> sample_minibatch(const ReplayBuffers& bufs, int n,
                                                double collision_fraction,
                                                std::mt19937_64& rng);

// Single prioritized buffer: transitions are sampled proportionally to
// (|td_error| + epsilon)^alpha, with importance weights (N * P(i))^(-beta)
// normalized by the largest weight in the buffer. New entries get the
// current maximum priority. Sampling is a linear scan over the priorities.
class PrioritizedBuffer {
 public:
  PrioritizedBuffer(std::size_t capacity, double alpha, double beta, double epsilon)
      : capacity_(capacity), alpha_(alpha), beta_(beta), epsilon_(epsilon) {}

  void push(const Transition& t);

  struct Sample {
    std::vector<std::size_t> indices;
    std::vector<double> weights;
  };
  Sample sample(int n, std::mt19937_64& rng) const;

  void update_priorities(const std::vector<std::size_t>& indices,
                         const std::vector<double>& td_errors);

  std::size_t size() const { return items_.size(); }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  double priority(std::size_t i) const { return priorities_[i]; }

 private:
  std::size_t capacity_;
  double alpha_, beta_, epsilon_;
  std::size_t head_ = 0;
  double max_priority_ = 1.0;
  std::vector<Transition> items_;
  std::vector<double> priorities_;
};

}  // namespace ringdrive
