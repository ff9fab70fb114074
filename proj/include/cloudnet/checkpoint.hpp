#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/model.hpp"
#include "cloudnet/trainer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cloudnet {

// Binary layout: 8-byte magic "CLDNET01", little-endian u64 header length,
// JSON header (network config, parameter names and shapes, optional
// optimizer/schedule state and history), then float64 payload in header
// order: parameters, followed by Adam first and second moments if present.

struct StoredTensor {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  std::vector<double> values;  // column-major
};

struct StoredOptimizer {
  std::uint64_t adam_step = 0;
  std::vector<StoredTensor> first_moment;
  std::vector<StoredTensor> second_moment;
  LrState lr;
  int epoch = 0;
  std::vector<EpochRecord> history;
};

struct StoredCheckpoint {
  NetworkConfig config;
  std::vector<StoredTensor> params;
  std::optional<StoredOptimizer> optimizer;
};

void write_checkpoint_file(const std::filesystem::path& path, const StoredCheckpoint& ckpt);
StoredCheckpoint read_checkpoint_file(const std::filesystem::path& path);

namespace detail {

template <typename Scalar>
StoredTensor store(const std::string& name, const Mat<Scalar>& m) {
  StoredTensor t{name, m.rows(), m.cols(), std::vector<double>(std::size_t(m.size()))};
  for (Index i = 0; i < m.size(); ++i) t.values[std::size_t(i)] = double(m.data()[i]);
  return t;
}

template <typename Scalar>
Mat<Scalar> restore(const StoredTensor& t) {
  Mat<Scalar> m(t.rows, t.cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = Scalar(t.values[std::size_t(i)]);
  return m;
}

template <typename Scalar>
void check_layout(const Network<Scalar>& net, const std::vector<StoredTensor>& stored, const std::string& what) {
  if (stored.size() != net.params.size()) {
    throw Error(Errc::CheckpointMismatch, what + ": stored " + std::to_string(stored.size()) + " tensors, network has " +
                                              std::to_string(net.params.size()));
  }
  for (std::size_t i = 0; i < stored.size(); ++i) {
    const auto& p = net.params[i];
    if (stored[i].name != p.name || stored[i].rows != p.value.rows() || stored[i].cols != p.value.cols()) {
      throw Error(Errc::CheckpointMismatch, what + ": tensor " + stored[i].name + " does not match layer " + p.name);
    }
  }
}

}  // namespace detail

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, const TrainState<Scalar>& state, bool with_optimizer = true) {
  StoredCheckpoint ckpt;
  ckpt.config = state.network.config;
  for (const auto& p : state.network.params) ckpt.params.push_back(detail::store(p.name, p.value));
  if (with_optimizer) {
    StoredOptimizer opt;
    opt.adam_step = state.adam.step;
    for (std::size_t i = 0; i < state.adam.first_moment.size(); ++i) {
      const auto& name = state.network.params[i].name;
      opt.first_moment.push_back(detail::store(name, state.adam.first_moment[i]));
      opt.second_moment.push_back(detail::store(name, state.adam.second_moment[i]));
    }
    opt.lr = state.lr;
    opt.epoch = state.epoch;
    opt.history = state.history;
    ckpt.optimizer = std::move(opt);
  }
  write_checkpoint_file(path, ckpt);
}

template <typename Scalar>
void save_network(const std::filesystem::path& path, const Network<Scalar>& net) {
  TrainState<Scalar> s;
  s.network = net;
  save_checkpoint(path, s, false);
}

/// Restores the full training state. When `expected` is given, a differing
/// stored config raises CheckpointMismatch.
template <typename Scalar>
TrainState<Scalar> load_train_state(const std::filesystem::path& path,
                                    const std::optional<NetworkConfig>& expected = std::nullopt) {
  const StoredCheckpoint ckpt = read_checkpoint_file(path);
  if (expected && !(*expected == ckpt.config)) {
    throw Error(Errc::CheckpointMismatch,
                path.string() + " was written for a " + std::to_string(ckpt.config.levels()) + "-level network (side " +
                    std::to_string(ckpt.config.input_side) + "), config asks for " +
                    std::to_string(expected->levels()) + " levels (side " + std::to_string(expected->input_side) + ")");
  }
  TrainState<Scalar> s;
  s.network = build_network<Scalar>(ckpt.config, WeightInit{});
  detail::check_layout(s.network, ckpt.params, path.string());
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) s.network.params[i].value = detail::restore<Scalar>(ckpt.params[i]);
  if (ckpt.optimizer) {
    const auto& opt = *ckpt.optimizer;
    s.adam.step = opt.adam_step;
    if (!opt.first_moment.empty()) {
      detail::check_layout(s.network, opt.first_moment, path.string());
      detail::check_layout(s.network, opt.second_moment, path.string());
      for (std::size_t i = 0; i < opt.first_moment.size(); ++i) {
        s.adam.first_moment.push_back(detail::restore<Scalar>(opt.first_moment[i]));
        s.adam.second_moment.push_back(detail::restore<Scalar>(opt.second_moment[i]));
      }
    }
    s.lr = opt.lr;
    s.epoch = opt.epoch;
    s.history = opt.history;
  }
  return s;
}

template <typename Scalar>
Network<Scalar> load_network(const std::filesystem::path& path,
                             const std::optional<NetworkConfig>& expected = std::nullopt) {
  return load_train_state<Scalar>(path, expected).network;
}

}  // namespace cloudnet
