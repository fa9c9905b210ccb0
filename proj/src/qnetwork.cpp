#include <algorithm>
#include <cmath>

#include "hdrouting/agent.hpp"
#include "hdrouting/errors.hpp"

namespace hdr {

QNetwork::QNetwork(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw InvalidParameter("a network needs at least an input and an output layer");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw InvalidParameter("layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
  }
  params_.assign(total, 0.0);
}

QNetwork::QNetwork(std::vector<int> layer_sizes, Rng& rng) : QNetwork(std::move(layer_sizes)) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto in = static_cast<std::size_t>(sizes_[l]);
    const auto out = static_cast<std::size_t>(sizes_[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> init(-limit, limit);
    double* w = params_.data() + offsets_[l];
    for (std::size_t i = 0; i < out * in; ++i) w[i] = init(rng);
  }
}

std::vector<double> QNetwork::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_size())
    throw InvalidParameter("state has " + std::to_string(input.size()) + " components, network expects " +
                           std::to_string(input_size()));
  std::vector<double> a(input.begin(), input.end()), z;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(sizes_[l]);
    const auto out = static_cast<std::size_t>(sizes_[l + 1]);
    const double* w = params_.data() + offsets_[l];
    const double* b = w + out * in;
    z.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double sum = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) sum += row[i] * a[i];
      z[o] = (l + 1 < layers) ? std::max(0.0, sum) : sum;
    }
    a.swap(z);
  }
  return a;
}

std::vector<double> QNetwork::backward(std::span<const double> input, std::span<const double> output_grad,
                                       std::span<double> grad) const {
  if (static_cast<int>(input.size()) != input_size() || static_cast<int>(output_grad.size()) != output_size())
    throw InvalidParameter("dimension mismatch in backward pass");
  if (grad.size() != params_.size()) throw InvalidParameter("gradient buffer has wrong size");
  const std::size_t layers = sizes_.size() - 1;
  // acts[l] is the input to layer l; acts[layers] is the output.
  std::vector<std::vector<double>> acts(layers + 1);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(sizes_[l]);
    const auto out = static_cast<std::size_t>(sizes_[l + 1]);
    const double* w = params_.data() + offsets_[l];
    const double* b = w + out * in;
    auto& next = acts[l + 1];
    next.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double sum = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) sum += row[i] * acts[l][i];
      next[o] = (l + 1 < layers) ? std::max(0.0, sum) : sum;
    }
  }
  std::vector<double> delta(output_grad.begin(), output_grad.end()), prev;
  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<std::size_t>(sizes_[l]);
    const auto out = static_cast<std::size_t>(sizes_[l + 1]);
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + out * in;
    for (std::size_t o = 0; o < out; ++o) {
      if (delta[o] == 0.0) continue;
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += delta[o] * acts[l][i];
      gb[o] += delta[o];
    }
    if (l == 0) break;
    prev.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      if (delta[o] == 0.0) continue;
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
    }
    // Rectifier derivative: the hidden activation is positive exactly where it passed.
    for (std::size_t i = 0; i < in; ++i)
      if (!(acts[l][i] > 0.0)) prev[i] = 0.0;
    delta.swap(prev);
  }
  return acts[layers];
}

}  // namespace hdr
