#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/tensor.hpp"
#include "cloudnet/tiling.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cloudnet {

struct NetworkConfig {
  Index input_side = kModelInputSide;
  Index input_channels = kBandCount;
  std::vector<Index> depth_schedule{16, 32, 64, 128, 256};
  Index bottleneck_depth = 512;
  Index kernel_size = 3;
  Index output_channels = 1;

  Index levels() const { return Index(depth_schedule.size()); }
  /// Throws ConfigError when a depth, side or kernel constraint fails.
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

/// Default-style config with `levels` contracting blocks starting at `first_depth`.
NetworkConfig make_config(Index levels, Index input_side, Index first_depth = 16);

enum class InitScheme {
  Uniform,    // U[-bound, bound] for every weight and bias
  HeUniform,  // U[-sqrt(6 / fan_in), +sqrt(6 / fan_in)], zero biases
};

struct WeightInit {
  InitScheme scheme = InitScheme::Uniform;
  double bound = 1.0;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct Parameter {
  std::string name;
  Mat<Scalar> value;
  Index fan_in = 0;
};

struct ConvSlot {
  std::size_t weight = 0;
  std::size_t bias = 0;
  Index kernel = 3;
};

struct ContractingSlots {
  ConvSlot conv1, conv2;
};

struct ExpandingSlots {
  ConvSlot up, conv1, conv2;
};

/// Parameter table plus the index of every layer inside it.
template <typename Scalar>
struct Network {
  NetworkConfig config;
  std::vector<Parameter<Scalar>> params;
  std::vector<ContractingSlots> down;
  ContractingSlots bottleneck;
  std::vector<ExpandingSlots> up;  // up[0] consumes the bottleneck
  ConvSlot head;

  const Mat<Scalar>& value(std::size_t i) const { return params[i].value; }
  Mat<Scalar>& value(std::size_t i) { return params[i].value; }

  const Parameter<Scalar>* find(const std::string& name) const {
    for (const auto& p : params) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += std::size_t(p.value.size());
    return n;
  }
};

template <typename Scalar>
using Gradients = std::vector<Mat<Scalar>>;

namespace detail {

template <typename Scalar>
ConvSlot add_conv(Network<Scalar>& net, const std::string& name, Index in, Index out, Index k) {
  ConvSlot slot;
  slot.kernel = k;
  slot.weight = net.params.size();
  net.params.push_back({name + ".weight", Mat<Scalar>::Zero(out, in * k * k), in * k * k});
  slot.bias = net.params.size();
  net.params.push_back({name + ".bias", Mat<Scalar>::Zero(out, 1), in * k * k});
  return slot;
}

template <typename Scalar>
ConvSlot add_conv_transpose(Network<Scalar>& net, const std::string& name, Index in, Index out) {
  ConvSlot slot;
  slot.kernel = 2;
  slot.weight = net.params.size();
  net.params.push_back({name + ".weight", Mat<Scalar>::Zero(4 * out, in), in});
  slot.bias = net.params.size();
  net.params.push_back({name + ".bias", Mat<Scalar>::Zero(out, 1), in});
  return slot;
}

inline bool is_bias(const std::string& name) {
  return name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
}

}  // namespace detail

/// Allocates every layer for `config` and draws the parameters.
/// Two calls with the same config and init are bit-identical.
template <typename Scalar>
Network<Scalar> build_network(const NetworkConfig& config, const WeightInit& init = {}) {
  config.validate();
  Network<Scalar> net;
  net.config = config;
  const Index k = config.kernel_size;

  Index in = config.input_channels;
  for (Index i = 0; i < config.levels(); ++i) {
    const Index d = config.depth_schedule[std::size_t(i)];
    const std::string name = "down" + std::to_string(i);
    net.down.push_back({detail::add_conv(net, name + ".conv1", in, d, k),
                        detail::add_conv(net, name + ".conv2", d, d, k)});
    in = d;
  }
  net.bottleneck = {detail::add_conv(net, "bottleneck.conv1", in, config.bottleneck_depth, k),
                    detail::add_conv(net, "bottleneck.conv2", config.bottleneck_depth, config.bottleneck_depth, k)};
  in = config.bottleneck_depth;
  for (Index j = 0; j < config.levels(); ++j) {
    const Index d = config.depth_schedule[std::size_t(config.levels() - 1 - j)];
    const std::string name = "up" + std::to_string(j);
    net.up.push_back({detail::add_conv_transpose(net, name + ".convT", in, d),
                      detail::add_conv(net, name + ".conv1", 2 * d, d, k),
                      detail::add_conv(net, name + ".conv2", d, d, k)});
    in = d;
  }
  net.head = detail::add_conv(net, "head", in, config.output_channels, 1);

  std::mt19937_64 rng(init.seed);
  for (auto& p : net.params) {
    double bound = init.bound;
    if (init.scheme == InitScheme::HeUniform) {
      if (detail::is_bias(p.name)) continue;
      bound = std::sqrt(6.0 / double(p.fan_in));
    }
    // Column-major fill order is part of the determinism contract.
    for (Index i = 0; i < p.value.size(); ++i) {
      const double u = double(rng() >> 11) * 0x1.0p-53;
      p.value.data()[i] = Scalar((2.0 * u - 1.0) * bound);
    }
  }
  return net;
}

// ---------------------------------------------------------------------------
// Blocks

template <typename Scalar>
struct ContractingTrace {
  FeatureMap<Scalar> input, h1, h2, features, pooled;
  std::vector<Index> argmax;
};

/// Two 3x3 conv+ReLU to `target` depth, plus an identity shortcut that repeats
/// the input depth-wise; the sum goes through ReLU and then 2x2 max pooling.
template <typename Scalar>
ContractingTrace<Scalar> contracting_block(const Network<Scalar>& net, const ContractingSlots& s,
                                           const FeatureMap<Scalar>& x, bool pool = true) {
  const Index target = net.value(s.conv1.weight).rows();
  if (x.depth() == 0 || target % x.depth() != 0) {
    throw Error(Errc::DepthError, "block depth " + std::to_string(target) + " is not a multiple of input depth " +
                                      std::to_string(x.depth()));
  }
  ContractingTrace<Scalar> t;
  t.input = x;
  t.h1 = conv2d(x, net.value(s.conv1.weight), net.value(s.conv1.bias), s.conv1.kernel);
  t.h1.data = relu(t.h1.data);
  t.h2 = conv2d(t.h1, net.value(s.conv2.weight), net.value(s.conv2.bias), s.conv2.kernel);
  t.h2.data = relu(t.h2.data);
  t.features = FeatureMap<Scalar>(x.height, x.width, relu(t.h2.data + x.data.replicate(target / x.depth(), 1)));
  if (pool) t.pooled = max_pool2x2(t.features, &t.argmax);
  return t;
}

template <typename Scalar>
struct ExpandingTrace {
  FeatureMap<Scalar> below, up, joined, h1, h2, out;
};

/// 2x2 stride-2 transposed conv halving the depth, concatenation with the
/// mirror-level skip, two 3x3 conv+ReLU, then an additive shortcut from the
/// upsampled features and a final ReLU.
template <typename Scalar>
ExpandingTrace<Scalar> expanding_block(const Network<Scalar>& net, const ExpandingSlots& s,
                                       const FeatureMap<Scalar>& below, const FeatureMap<Scalar>& skip) {
  if (skip.height != 2 * below.height || skip.width != 2 * below.width || 2 * skip.depth() != below.depth()) {
    throw Error(Errc::ShapeMismatch, "expanding block cannot pair " + shape_string(below) + " with skip " +
                                         shape_string(skip));
  }
  ExpandingTrace<Scalar> t;
  t.below = below;
  t.up = conv_transpose2x2(below, net.value(s.up.weight), net.value(s.up.bias));
  t.joined = concat_depth(t.up, skip);
  t.h1 = conv2d(t.joined, net.value(s.conv1.weight), net.value(s.conv1.bias), s.conv1.kernel);
  t.h1.data = relu(t.h1.data);
  t.h2 = conv2d(t.h1, net.value(s.conv2.weight), net.value(s.conv2.bias), s.conv2.kernel);
  t.h2.data = relu(t.h2.data);
  t.out = FeatureMap<Scalar>(t.up.height, t.up.width, relu(t.h2.data + t.up.data));
  return t;
}

template <typename Scalar>
struct ForwardTrace {
  std::vector<ContractingTrace<Scalar>> down;
  ContractingTrace<Scalar> bottleneck;
  std::vector<ExpandingTrace<Scalar>> up;
  FeatureMap<Scalar> probability;  // depth 1
};

template <typename Scalar>
void check_input(const Network<Scalar>& net, const FeatureMap<Scalar>& x) {
  const auto& c = net.config;
  if (x.depth() != c.input_channels || x.height != c.input_side || x.width != c.input_side) {
    throw Error(Errc::ShapeMismatch, "network expects " + std::to_string(c.input_side) + "x" +
                                         std::to_string(c.input_side) + "x" + std::to_string(c.input_channels) +
                                         ", got " + shape_string(x));
  }
}

/// Full pass keeping every intermediate needed for backpropagation.
template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const Network<Scalar>& net, const FeatureMap<Scalar>& x) {
  check_input(net, x);
  ForwardTrace<Scalar> t;
  const FeatureMap<Scalar>* cur = &x;
  for (const auto& slots : net.down) {
    t.down.push_back(contracting_block(net, slots, *cur));
    cur = &t.down.back().pooled;
  }
  t.bottleneck = contracting_block(net, net.bottleneck, *cur, false);
  cur = &t.bottleneck.features;
  const std::size_t levels = net.down.size();
  for (std::size_t j = 0; j < levels; ++j) {
    t.up.push_back(expanding_block(net, net.up[j], *cur, t.down[levels - 1 - j].features));
    cur = &t.up.back().out;
  }
  t.probability = conv2d(*cur, net.value(net.head.weight), net.value(net.head.bias), 1);
  t.probability.data = t.probability.data.unaryExpr([](Scalar z) { return sigmoid(z); });
  return t;
}

template <typename Scalar>
FeatureMap<Scalar> forward(const Network<Scalar>& net, const FeatureMap<Scalar>& x) {
  return forward_trace(net, x).probability;
}

template <typename Scalar>
std::vector<FeatureMap<Scalar>> forward(const Network<Scalar>& net, const std::vector<FeatureMap<Scalar>>& batch) {
  std::vector<FeatureMap<Scalar>> out;
  out.reserve(batch.size());
  for (const auto& x : batch) out.push_back(forward(net, x));
  return out;
}

// ---------------------------------------------------------------------------
// Backward

namespace detail {

template <typename Scalar>
void accumulate_conv(Gradients<Scalar>& g, const ConvSlot& s, const ConvGrads<Scalar>& cg) {
  g[s.weight] += cg.weight;
  g[s.bias] += cg.bias;
}

// Returns the gradient with respect to the block input.
template <typename Scalar>
FeatureMap<Scalar> contracting_backward(const Network<Scalar>& net, const ContractingSlots& s,
                                        const ContractingTrace<Scalar>& t, Mat<Scalar> d_features,
                                        Gradients<Scalar>& g) {
  relu_backward_inplace(t.features.data, d_features);
  const Index in_depth = t.input.depth();
  const Index copies = d_features.rows() / in_depth;
  Mat<Scalar> d_input = Mat<Scalar>::Zero(in_depth, t.input.pixels());
  for (Index c = 0; c < copies; ++c) d_input += d_features.middleRows(c * in_depth, in_depth);

  Mat<Scalar> d_h2 = std::move(d_features);
  relu_backward_inplace(t.h2.data, d_h2);
  auto g2 = conv2d_backward(t.h1, net.value(s.conv2.weight), FeatureMap<Scalar>(t.h2.height, t.h2.width, d_h2),
                            s.conv2.kernel);
  accumulate_conv(g, s.conv2, g2);
  relu_backward_inplace(t.h1.data, g2.input.data);
  auto g1 = conv2d_backward(t.input, net.value(s.conv1.weight), g2.input, s.conv1.kernel);
  accumulate_conv(g, s.conv1, g1);
  d_input += g1.input.data;
  return FeatureMap<Scalar>(t.input.height, t.input.width, std::move(d_input));
}

template <typename Scalar>
std::pair<FeatureMap<Scalar>, Mat<Scalar>> expanding_backward(const Network<Scalar>& net, const ExpandingSlots& s,
                                                              const ExpandingTrace<Scalar>& t, Mat<Scalar> d_out,
                                                              Gradients<Scalar>& g) {
  relu_backward_inplace(t.out.data, d_out);
  Mat<Scalar> d_up = d_out;
  relu_backward_inplace(t.h2.data, d_out);
  auto g2 = conv2d_backward(t.h1, net.value(s.conv2.weight), FeatureMap<Scalar>(t.h2.height, t.h2.width, d_out),
                            s.conv2.kernel);
  accumulate_conv(g, s.conv2, g2);
  relu_backward_inplace(t.h1.data, g2.input.data);
  auto g1 = conv2d_backward(t.joined, net.value(s.conv1.weight), g2.input, s.conv1.kernel);
  accumulate_conv(g, s.conv1, g1);
  const Index d = t.up.depth();
  d_up += g1.input.data.topRows(d);
  Mat<Scalar> d_skip = g1.input.data.bottomRows(d);
  auto gu = conv_transpose2x2_backward(t.below, net.value(s.up.weight),
                                       FeatureMap<Scalar>(t.up.height, t.up.width, std::move(d_up)));
  accumulate_conv(g, s.up, gu);
  return {std::move(gu.input), std::move(d_skip)};
}

}  // namespace detail

template <typename Scalar>
Gradients<Scalar> zero_gradients(const Network<Scalar>& net) {
  Gradients<Scalar> g;
  g.reserve(net.params.size());
  for (const auto& p : net.params) g.push_back(Mat<Scalar>::Zero(p.value.rows(), p.value.cols()));
  return g;
}

/// Accumulates d(objective)/d(parameters) into `g`, given d(objective)/d(probability)
/// as a 1 x pixels row.
template <typename Scalar>
void backward(const Network<Scalar>& net, const ForwardTrace<Scalar>& t, const Mat<Scalar>& d_probability,
              Gradients<Scalar>& g) {
  const Mat<Scalar>& p = t.probability.data;
  Mat<Scalar> d_logit = d_probability.cwiseProduct(p.cwiseProduct((Scalar(1) - p.array()).matrix()));
  const FeatureMap<Scalar>& last = t.up.back().out;
  auto gh = conv2d_backward(last, net.value(net.head.weight), FeatureMap<Scalar>(last.height, last.width, d_logit), 1);
  detail::accumulate_conv(g, net.head, gh);

  const std::size_t levels = net.down.size();
  std::vector<Mat<Scalar>> d_skip(levels);
  Mat<Scalar> d = std::move(gh.input.data);
  for (std::size_t j = levels; j-- > 0;) {
    auto [d_below, ds] = detail::expanding_backward(net, net.up[j], t.up[j], std::move(d), g);
    d_skip[levels - 1 - j] = std::move(ds);
    d = std::move(d_below.data);
  }
  d = detail::contracting_backward(net, net.bottleneck, t.bottleneck, std::move(d), g).data;
  for (std::size_t i = levels; i-- > 0;) {
    const auto& tr = t.down[i];
    Mat<Scalar> d_features = d_skip[i];
    d_features += max_pool2x2_backward(tr.features, tr.argmax, FeatureMap<Scalar>(tr.pooled.height, tr.pooled.width, d)).data;
    d = detail::contracting_backward(net, net.down[i], tr, std::move(d_features), g).data;
  }
}

/// Packs a 4-band patch into the network's input layout.
template <typename Scalar>
FeatureMap<Scalar> to_feature_map(const SpectralPatch<Scalar>& patch) {
  const Index s = patch.side();
  FeatureMap<Scalar> f(kBandCount, s, patch.bands[0].cols());
  for (int b = 0; b < kBandCount; ++b) {
    f.data.row(b) = Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(patch.bands[b].data(),
                                                                               patch.bands[b].size());
  }
  return f;
}

/// Single-channel map back into a raster.
template <typename Scalar>
Raster<Scalar> to_raster(const FeatureMap<Scalar>& f) {
  Raster<Scalar> r(f.height, f.width);
  Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(r.data(), r.size()) = f.data.row(0);
  return r;
}

template <typename Scalar>
Mat<Scalar> flatten(const Raster<Scalar>& r) {
  return Eigen::Map<const Mat<Scalar>>(r.data(), 1, r.size());
}

}  // namespace cloudnet
