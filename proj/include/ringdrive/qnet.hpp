#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace ringdrive {

// Fully connected net with leaky-ReLU hidden layers and a linear output
// head. Parameters live in one flat buffer laid out layer by layer as
// W0, b0, W1, b1, ... with each W row-major (output x input).
struct QNetwork {
  std::vector<int> arch;  // layer widths, input first
  double leak = 0.01;
  std::vector<double> theta;

  static QNetwork zeros(std::vector<int> arch, double leak = 0.01);
  // Fan-in scaled uniform init, biases zero.
  static QNetwork init_random(std::vector<int> arch, std::mt19937_64& rng, double leak = 0.01);

  int num_layers() const { return static_cast<int>(arch.size()) - 1; }
  int input_size() const { return arch.front(); }
  int output_size() const { return arch.back(); }
  std::size_t weight_offset(int layer) const;
  std::size_t bias_offset(int layer) const;
  static std::size_t param_count(const std::vector<int>& arch);
};

// Reusable activation/backprop storage so the hot loops do not allocate.
struct Workspace {
  std::vector<std::vector<double>> act;    // act[l]: layer l activations
  std::vector<std::vector<double>> delta;  // delta[l]: dL/dz at layer l
  void resize(const QNetwork& net);
};

// Forward pass; returns the output activations (owned by ws).
const std::vector<double>& forward(const QNetwork& net, std::span<const double> input,
                                   Workspace& ws);

// Allocating convenience wrapper.
std::vector<double> forward(const QNetwork& net, std::span<const double> input);

// Index of the maximal Q value; ties resolve to the lowest index.
int argmax_q(const QNetwork& net, std::span<const double> input, Workspace& ws);

struct BatchSample {
  const double* state = nullptr;  // input_size values
  int action = 0;
  double target = 0.0;
  double weight = 1.0;  // importance weight; 1 for plain replay
};

// Weighted squared error on the selected action's Q value, averaged over the
// batch; accumulates the full parameter gradient into grad (resized and
// zeroed here). Returns the loss. When residuals is given it receives the
// per-sample prediction errors q(s, a) - target.
double loss_and_gradient(const QNetwork& net, std::span<const BatchSample> batch,
                         std::vector<double>& grad, Workspace& ws,
                         std::vector<double>* residuals = nullptr);

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  std::vector<double> m, v;

  AdamState() = default;
  AdamState(std::size_t n, double lr_) : lr(lr_), m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update of net.theta along grad.
void adam_step(QNetwork& net, const std::vector<double>& grad, AdamState& st);

}  // namespace ringdrive
