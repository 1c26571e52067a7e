#include "ringdrive/replay.hpp"

#include <cmath>
#include <stdexcept>

namespace ringdrive {

std::vector<const Transition*> sample_minibatch(const ReplayBuffers& bufs, int n,
                                                double collision_fraction,
                                                std::mt19937_64& rng) {
  if (n <= 0) throw std::invalid_argument("sample_minibatch: batch size must be positive");
  if (bufs.safe.empty()) throw std::runtime_error("sample_minibatch: safe buffer is empty");
  std::size_t want_c = static_cast<std::size_t>(std::llround(n * collision_fraction));
  std::size_t n_c = std::min(want_c, bufs.collision.size());
  std::vector<const Transition*> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n_c > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, bufs.collision.size() - 1);
    for (std::size_t i = 0; i < n_c; ++i) out.push_back(&bufs.collision[pick(rng)]);
  }
  std::uniform_int_distribution<std::size_t> pick(0, bufs.safe.size() - 1);
  for (std::size_t i = n_c; i < static_cast<std::size_t>(n); ++i) {
    out.push_back(&bufs.safe[pick(rng)]);
  }
  return out;
}

void PrioritizedBuffer::push(const Transition& t) {
  if (items_.size() < capacity_) {
    items_.push_back(t);
    priorities_.push_back(max_priority_);
  } else {
    items_[head_] = t;
    priorities_[head_] = max_priority_;
    head_ = (head_ + 1) % capacity_;
  }
}

PrioritizedBuffer::Sample PrioritizedBuffer::sample(int n, std::mt19937_64& rng) const {
  if (items_.empty()) throw std::runtime_error("PrioritizedBuffer: empty");
  // Linear scan: at this problem size a cumulative array beats a sum tree in
  // simplicity and is still cheap relative to the gradient work per step.
  std::vector<double> cumulative(priorities_.size());
  double total = 0.0;
  double max_p = 0.0;
  for (std::size_t i = 0; i < priorities_.size(); ++i) {
    total += priorities_[i];
    cumulative[i] = total;
    if (priorities_[i] > max_p) max_p = priorities_[i];
  }
  Sample s;
  s.indices.resize(static_cast<std::size_t>(n));
  s.weights.resize(static_cast<std::size_t>(n));
  double n_items = static_cast<double>(items_.size());
  // The largest weight in the buffer belongs to the smallest priority; using
  // it as the normalizer keeps every weight at most 1.
  double min_p = priorities_[0];
  for (double p : priorities_) min_p = std::min(min_p, p);
  double w_max = std::pow(n_items * (min_p / total), -beta_);
  std::uniform_real_distribution<double> unit(0.0, total);
  for (int k = 0; k < n; ++k) {
    double u = unit(rng);
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cumulative[mid] > u) hi = mid; else lo = mid + 1;
    }
    s.indices[k] = lo;
    double prob = priorities_[lo] / total;
    s.weights[k] = std::pow(n_items * prob, -beta_) / w_max;
  }
  return s;
}

void PrioritizedBuffer::update_priorities(const std::vector<std::size_t>& indices,
                                          const std::vector<double>& td_errors) {
  for (std::size_t k = 0; k < indices.size(); ++k) {
    double p = std::pow(std::abs(td_errors[k]) + epsilon_, alpha_);
    priorities_[indices[k]] = p;
    if (p > max_priority_) max_priority_ = p;
  }
}

}  // namespace ringdrive
