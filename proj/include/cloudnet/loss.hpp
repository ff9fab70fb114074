#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/tensor.hpp"

#include <Eigen/Core>

#include <vector>

namespace cloudnet {

inline constexpr double kJaccardEpsilon = 1e-7;

/// Soft Jaccard loss of a prediction `y` in [0,1] against a binary target `t`:
///
///   -(sum t*y + eps) / (sum t + sum y - sum t*y + eps)
///
/// Always in [-1, 0). The all-zero pair gives -1 through the eps terms.
template <typename Scalar>
class SoftJaccard {
 public:
  explicit SoftJaccard(Scalar epsilon = Scalar(kJaccardEpsilon)) : eps_(epsilon) {
    if (!(epsilon > Scalar(0))) throw Error(Errc::DomainError, "epsilon must be positive");
  }

  Scalar epsilon() const { return eps_; }

  template <typename TD, typename YD>
  Scalar value(const Eigen::DenseBase<TD>& t, const Eigen::DenseBase<YD>& y) const {
    check(t, y);
    const Scalar inter = (t.derived().array() * y.derived().array()).sum();
    const Scalar union_ = t.derived().sum() + y.derived().sum() - inter;
    return -(inter + eps_) / (union_ + eps_);
  }

  /// d(loss)/dy, same shape as y.
  template <typename TD, typename YD>
  Mat<Scalar> gradient(const Eigen::DenseBase<TD>& t, const Eigen::DenseBase<YD>& y) const {
    check(t, y);
    const auto ta = t.derived().array();
    const auto ya = y.derived().array();
    const Scalar num = (ta * ya).sum() + eps_;
    const Scalar den = ta.sum() + ya.sum() - (ta * ya).sum() + eps_;
    // d num/dy_i = t_i, d den/dy_i = 1 - t_i
    Mat<Scalar> g = (-(ta * den - num * (Scalar(1) - ta)) / (den * den)).matrix();
    return g;
  }

 private:
  template <typename TD, typename YD>
  static void check(const Eigen::DenseBase<TD>& t, const Eigen::DenseBase<YD>& y) {
    if (t.rows() != y.rows() || t.cols() != y.cols() || t.size() == 0) {
      throw Error(Errc::ShapeMismatch, "target and prediction must have the same non-zero size");
    }
    const auto ta = t.derived().array();
    const auto ya = y.derived().array();
    if (!((ta == Scalar(0)) || (ta == Scalar(1))).all()) {
      throw Error(Errc::DomainError, "target must be binary");
    }
    if (!((ya >= Scalar(0)) && (ya <= Scalar(1))).all()) {
      throw Error(Errc::DomainError, "prediction must lie in [0, 1]");
    }
  }

  Scalar eps_;
};

template <typename Scalar, typename TD, typename YD>
Scalar soft_jaccard_loss(const Eigen::DenseBase<TD>& t, const Eigen::DenseBase<YD>& y,
                         Scalar epsilon = Scalar(kJaccardEpsilon)) {
  return SoftJaccard<Scalar>(epsilon).value(t, y);
}

/// Mean of per-sample losses.
template <typename Scalar>
Scalar batch_loss(const std::vector<Mat<Scalar>>& targets, const std::vector<Mat<Scalar>>& predictions,
                  Scalar epsilon = Scalar(kJaccardEpsilon)) {
  if (targets.size() != predictions.size()) throw Error(Errc::ShapeMismatch, "batch sizes differ");
  if (targets.empty()) throw Error(Errc::EmptyBatch, "batch has no samples");
  const SoftJaccard<Scalar> loss(epsilon);
  Scalar sum(0);
  for (std::size_t i = 0; i < targets.size(); ++i) sum += loss.value(targets[i], predictions[i]);
  return sum / Scalar(targets.size());
}

}  // namespace cloudnet
