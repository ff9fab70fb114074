#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace cloudnet {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  std::uint64_t step = 0;
  std::vector<Mat<Scalar>> first_moment;
  std::vector<Mat<Scalar>> second_moment;
};

namespace detail {

template <typename Scalar, typename ParamAt>
void adam_update_impl(std::size_t count, ParamAt&& param_at, const std::vector<Mat<Scalar>>& grads,
                      AdamState<Scalar>& state, double lr, const AdamConfig& cfg) {
  if (grads.size() != count) throw Error(Errc::ShapeMismatch, "gradient count does not match parameter count");
  for (std::size_t i = 0; i < count; ++i) {
    const Mat<Scalar>& p = param_at(i);
    if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols()) {
      throw Error(Errc::ShapeMismatch, "gradient " + std::to_string(i) + " has shape " +
                                           std::to_string(grads[i].rows()) + "x" + std::to_string(grads[i].cols()) +
                                           ", parameter is " + std::to_string(p.rows()) + "x" +
                                           std::to_string(p.cols()));
    }
    if (!grads[i].allFinite()) throw Error(Errc::NonFiniteGradient, "gradient " + std::to_string(i) + " is not finite");
  }
  if (state.first_moment.size() != count) {
    state.step = 0;
    state.first_moment.clear();
    state.second_moment.clear();
    for (std::size_t i = 0; i < count; ++i) {
      state.first_moment.push_back(Mat<Scalar>::Zero(grads[i].rows(), grads[i].cols()));
      state.second_moment.push_back(Mat<Scalar>::Zero(grads[i].rows(), grads[i].cols()));
    }
  }

  ++state.step;
  const double t = double(state.step);
  const Scalar b1 = Scalar(cfg.beta1), b2 = Scalar(cfg.beta2);
  const Scalar c1 = Scalar(1.0 - std::pow(cfg.beta1, t));
  const Scalar c2 = Scalar(1.0 - std::pow(cfg.beta2, t));
  const Scalar step = Scalar(lr);
  const Scalar eps = Scalar(cfg.epsilon);
  for (std::size_t i = 0; i < count; ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = b1 * m + (Scalar(1) - b1) * grads[i];
    v = b2 * v + (Scalar(1) - b2) * grads[i].cwiseAbs2();
    param_at(i).array() -= step * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

}  // namespace detail

/// One bias-corrected Adam step on plain matrices.
template <typename Scalar>
void adam_update(std::vector<Mat<Scalar>>& params, const std::vector<Mat<Scalar>>& grads, AdamState<Scalar>& state,
                 double lr, const AdamConfig& cfg = {}) {
  detail::adam_update_impl<Scalar>(
      params.size(), [&](std::size_t i) -> Mat<Scalar>& { return params[i]; }, grads, state, lr, cfg);
}

/// Reduce-on-plateau learning-rate policy.
struct PlateauSchedule {
  double initial_lr = 1e-4;
  double decay_rate = 0.7;
  int patience = 15;
  double lr_floor = 1e-9;
  double tolerance = 1e-8;

  void validate() const {
    if (!(decay_rate > 0.0 && decay_rate < 1.0)) throw Error(Errc::ConfigError, "decay_rate must lie in (0, 1)");
    if (!(lr_floor > 0.0 && lr_floor < initial_lr)) throw Error(Errc::ConfigError, "need 0 < lr_floor < initial_lr");
    if (patience < 1) throw Error(Errc::ConfigError, "patience must be at least 1");
  }
};

struct LrState {
  double current_lr = 1e-4;
  int epochs_since_improvement = 0;
  double best = std::numeric_limits<double>::infinity();

  static LrState start(const PlateauSchedule& s) { return {s.initial_lr, 0, std::numeric_limits<double>::infinity()}; }
};

/// Counts non-improving epochs; after `patience` of them the rate is scaled by
/// `decay_rate`, never going below `lr_floor`.
inline LrState lr_step(LrState state, double monitored, const PlateauSchedule& s) {
  if (monitored < state.best - s.tolerance) {
    state.best = monitored;
    state.epochs_since_improvement = 0;
    return state;
  }
  if (++state.epochs_since_improvement >= s.patience) {
    state.current_lr = std::max(state.current_lr * s.decay_rate, s.lr_floor);
    state.epochs_since_improvement = 0;
  }
  return state;
}

}  // namespace cloudnet
