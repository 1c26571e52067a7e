#include "ringdrive/qnet.hpp"

#include <cmath>
#include <stdexcept>

namespace ringdrive {

std::size_t QNetwork::param_count(const std::vector<int>& arch) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
    n += static_cast<std::size_t>(arch[l + 1]) * arch[l] + arch[l + 1];
  }
  return n;
}

std::size_t QNetwork::weight_offset(int layer) const {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l) {
    off += static_cast<std::size_t>(arch[l + 1]) * arch[l] + arch[l + 1];
  }
  return off;
}

std::size_t QNetwork::bias_offset(int layer) const {
  return weight_offset(layer) + static_cast<std::size_t>(arch[layer + 1]) * arch[layer];
}

QNetwork QNetwork::zeros(std::vector<int> arch, double leak) {
  if (arch.size() < 2) throw std::invalid_argument("QNetwork: need at least two layers");
  QNetwork n;
  n.arch = std::move(arch);
  n.leak = leak;
  n.theta.assign(param_count(n.arch), 0.0);
  return n;
}

QNetwork QNetwork::init_random(std::vector<int> arch, std::mt19937_64& rng, double leak) {
  QNetwork n = zeros(std::move(arch), leak);
  for (int l = 0; l < n.num_layers(); ++l) {
    double limit = std::sqrt(6.0 / n.arch[l]);
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::size_t w0 = n.weight_offset(l);
    std::size_t count = static_cast<std::size_t>(n.arch[l + 1]) * n.arch[l];
    for (std::size_t i = 0; i < count; ++i) n.theta[w0 + i] = dist(rng);
    // biases stay zero
  }
  return n;
}

void Workspace::resize(const QNetwork& net) {
  act.resize(net.arch.size());
  delta.resize(net.arch.size());
  for (std::size_t l = 0; l < net.arch.size(); ++l) {
    act[l].resize(net.arch[l]);
    delta[l].resize(net.arch[l]);
  }
}

const std::vector<double>& forward(const QNetwork& net, std::span<const double> input,
                                   Workspace& ws) {
  if (static_cast<int>(input.size()) != net.input_size()) {
    throw std::invalid_argument("forward: input size mismatch");
  }
  ws.resize(net);
  std::copy(input.begin(), input.end(), ws.act[0].begin());
  int L = net.num_layers();
  for (int l = 0; l < L; ++l) {
    const double* w = net.theta.data() + net.weight_offset(l);
    const double* b = net.theta.data() + net.bias_offset(l);
    const std::vector<double>& in = ws.act[l];
    std::vector<double>& out = ws.act[l + 1];
    int n_in = net.arch[l];
    int n_out = net.arch[l + 1];
    for (int o = 0; o < n_out; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * n_in;
      double z = b[o];
      for (int i = 0; i < n_in; ++i) z += row[i] * in[i];
      // hidden layers are leaky, the last layer is linear
      out[o] = (l == L - 1 || z > 0.0) ? z : net.leak * z;
    }
  }
  return ws.act.back();
}

std::vector<double> forward(const QNetwork& net, std::span<const double> input) {
  Workspace ws;
  return forward(net, input, ws);
}

int argmax_q(const QNetwork& net, std::span<const double> input, Workspace& ws) {
  const std::vector<double>& q = forward(net, input, ws);
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

double loss_and_gradient(const QNetwork& net, std::span<const BatchSample> batch,
                         std::vector<double>& grad, Workspace& ws,
                         std::vector<double>* residuals) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  grad.assign(net.theta.size(), 0.0);
  ws.resize(net);
  if (residuals) residuals->clear();
  int L = net.num_layers();
  double loss = 0.0;
  double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const BatchSample& s : batch) {
    forward(net, std::span<const double>(s.state, net.input_size()), ws);
    double q = ws.act[L][s.action];
    double err = q - s.target;
    if (residuals) residuals->push_back(err);
    loss += s.weight * err * err * inv_n;

    // Loss gradient flows only through the selected output.
    std::fill(ws.delta[L].begin(), ws.delta[L].end(), 0.0);
    ws.delta[L][s.action] = 2.0 * s.weight * err * inv_n;

    for (int l = L - 1; l >= 0; --l) {
      const double* w = net.theta.data() + net.weight_offset(l);
      double* gw = grad.data() + net.weight_offset(l);
      double* gb = grad.data() + net.bias_offset(l);
      const std::vector<double>& in = ws.act[l];
      const std::vector<double>& dz = ws.delta[l + 1];
      int n_in = net.arch[l];
      int n_out = net.arch[l + 1];
      if (l > 0) std::fill(ws.delta[l].begin(), ws.delta[l].end(), 0.0);
      for (int o = 0; o < n_out; ++o) {
        double d = dz[o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* grow = gw + static_cast<std::size_t>(o) * n_in;
        const double* wrow = w + static_cast<std::size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) {
          grow[i] += d * in[i];
          if (l > 0) ws.delta[l][i] += d * wrow[i];
        }
      }
      if (l > 0) {
        // pass through the leaky-ReLU derivative of layer l's activation
        for (int i = 0; i < n_in; ++i) {
          if (ws.act[l][i] <= 0.0) ws.delta[l][i] *= net.leak;
        }
      }
    }
  }
  return loss;
}

void adam_step(QNetwork& net, const std::vector<double>& grad, AdamState& st) {
  if (grad.size() != net.theta.size() || st.m.size() != net.theta.size()) {
    throw std::invalid_argument("adam_step: size mismatch");
  }
  st.step += 1;
  double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < net.theta.size(); ++i) {
    double g = grad[i];
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
    double m_hat = st.m[i] / bc1;
    double v_hat = st.v[i] / bc2;
    net.theta[i] -= st.lr * m_hat / (std::sqrt(v_hat) + st.eps);
  }
}

}  // namespace ringdrive
