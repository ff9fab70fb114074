#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/raster.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace cloudnet {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Multi-channel activation: one row per channel, one column per pixel
/// (pixel index y * width + x).
template <typename Scalar>
struct FeatureMap {
  Index height = 0;
  Index width = 0;
  Mat<Scalar> data;

  FeatureMap() = default;
  FeatureMap(Index depth, Index h, Index w) : height(h), width(w), data(Mat<Scalar>::Zero(depth, h * w)) {}
  FeatureMap(Index h, Index w, Mat<Scalar> values) : height(h), width(w), data(std::move(values)) {}

  Index depth() const { return data.rows(); }
  Index pixels() const { return height * width; }
  Scalar at(Index c, Index y, Index x) const { return data(c, y * width + x); }
  Scalar& at(Index c, Index y, Index x) { return data(c, y * width + x); }
};

template <typename Scalar>
std::string shape_string(const FeatureMap<Scalar>& f) {
  return std::to_string(f.height) + "x" + std::to_string(f.width) + "x" + std::to_string(f.depth());
}

// ---------------------------------------------------------------------------
// Convolution with "same" zero padding, odd square kernel, stride 1.
// Weights are (out_depth) x (in_depth * k * k), column index (c * k + ky) * k + kx.

template <typename Scalar>
Mat<Scalar> im2col(const FeatureMap<Scalar>& x, Index k) {
  const Index r = k / 2;
  const Index h = x.height, w = x.width;
  Mat<Scalar> cols = Mat<Scalar>::Zero(x.depth() * k * k, h * w);
  for (Index c = 0; c < x.depth(); ++c) {
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        const Index row = (c * k + ky) * k + kx;
        const Index dy = ky - r, dx = kx - r;
        for (Index y = std::max<Index>(0, -dy); y < std::min(h, h - dy); ++y) {
          const Index x0 = std::max<Index>(0, -dx), x1 = std::min(w, w - dx);
          for (Index xx = x0; xx < x1; ++xx) cols(row, y * w + xx) = x.data(c, (y + dy) * w + xx + dx);
        }
      }
    }
  }
  return cols;
}

template <typename Scalar>
FeatureMap<Scalar> col2im(const Mat<Scalar>& cols, Index depth, Index h, Index w, Index k) {
  const Index r = k / 2;
  FeatureMap<Scalar> x(depth, h, w);
  for (Index c = 0; c < depth; ++c) {
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        const Index row = (c * k + ky) * k + kx;
        const Index dy = ky - r, dx = kx - r;
        for (Index y = std::max<Index>(0, -dy); y < std::min(h, h - dy); ++y) {
          const Index x0 = std::max<Index>(0, -dx), x1 = std::min(w, w - dx);
          for (Index xx = x0; xx < x1; ++xx) x.data(c, (y + dy) * w + xx + dx) += cols(row, y * w + xx);
        }
      }
    }
  }
  return x;
}

template <typename Scalar>
FeatureMap<Scalar> conv2d(const FeatureMap<Scalar>& x, const Mat<Scalar>& weight, const Mat<Scalar>& bias,
                          Index k) {
  if (weight.cols() != x.depth() * k * k) {
    throw Error(Errc::ShapeMismatch, "convolution expects depth " + std::to_string(weight.cols() / (k * k)) +
                                         ", got " + shape_string(x));
  }
  FeatureMap<Scalar> y;
  y.height = x.height;
  y.width = x.width;
  if (k == 1) {
    y.data.noalias() = weight * x.data;
  } else {
    y.data.noalias() = weight * im2col(x, k);
  }
  y.data.colwise() += bias.col(0);
  return y;
}

template <typename Scalar>
struct ConvGrads {
  FeatureMap<Scalar> input;
  Mat<Scalar> weight;
  Mat<Scalar> bias;
};

/// Backward pass of conv2d given its input and the upstream gradient.
template <typename Scalar>
ConvGrads<Scalar> conv2d_backward(const FeatureMap<Scalar>& x, const Mat<Scalar>& weight,
                                  const FeatureMap<Scalar>& grad_out, Index k) {
  ConvGrads<Scalar> g;
  g.bias = grad_out.data.rowwise().sum();
  if (k == 1) {
    g.weight.noalias() = grad_out.data * x.data.transpose();
    g.input = FeatureMap<Scalar>(x.height, x.width, weight.transpose() * grad_out.data);
  } else {
    const Mat<Scalar> cols = im2col(x, k);
    g.weight.noalias() = grad_out.data * cols.transpose();
    const Mat<Scalar> dcols = weight.transpose() * grad_out.data;
    g.input = col2im(dcols, x.depth(), x.height, x.width, k);
  }
  return g;
}

// ---------------------------------------------------------------------------
// 2x2 stride-2 transposed convolution. Weight is (4 * out_depth) x in_depth;
// row block q = dy * 2 + dx maps onto output pixel (2y + dy, 2x + dx).

template <typename Scalar>
FeatureMap<Scalar> conv_transpose2x2(const FeatureMap<Scalar>& x, const Mat<Scalar>& weight,
                                     const Mat<Scalar>& bias) {
  if (weight.cols() != x.depth()) {
    throw Error(Errc::ShapeMismatch, "transposed convolution expects depth " + std::to_string(weight.cols()) +
                                         ", got " + shape_string(x));
  }
  const Index out_depth = weight.rows() / 4;
  const Mat<Scalar> taps = weight * x.data;
  FeatureMap<Scalar> y(out_depth, 2 * x.height, 2 * x.width);
  for (Index q = 0; q < 4; ++q) {
    const Index dy = q / 2, dx = q % 2;
    for (Index yy = 0; yy < x.height; ++yy) {
      for (Index xx = 0; xx < x.width; ++xx) {
        y.data.col((2 * yy + dy) * y.width + 2 * xx + dx) =
            taps.col(yy * x.width + xx).segment(q * out_depth, out_depth) + bias.col(0);
      }
    }
  }
  return y;
}

template <typename Scalar>
ConvGrads<Scalar> conv_transpose2x2_backward(const FeatureMap<Scalar>& x, const Mat<Scalar>& weight,
                                             const FeatureMap<Scalar>& grad_out) {
  const Index out_depth = weight.rows() / 4;
  Mat<Scalar> gathered(4 * out_depth, x.pixels());
  for (Index q = 0; q < 4; ++q) {
    const Index dy = q / 2, dx = q % 2;
    for (Index yy = 0; yy < x.height; ++yy) {
      for (Index xx = 0; xx < x.width; ++xx) {
        gathered.col(yy * x.width + xx).segment(q * out_depth, out_depth) =
            grad_out.data.col((2 * yy + dy) * grad_out.width + 2 * xx + dx);
      }
    }
  }
  ConvGrads<Scalar> g;
  g.bias = grad_out.data.rowwise().sum();
  g.weight.noalias() = gathered * x.data.transpose();
  g.input = FeatureMap<Scalar>(x.height, x.width, weight.transpose() * gathered);
  return g;
}

// ---------------------------------------------------------------------------
// 2x2 stride-2 max pooling. `argmax` records the winning source pixel.

template <typename Scalar>
FeatureMap<Scalar> max_pool2x2(const FeatureMap<Scalar>& x, std::vector<Index>* argmax = nullptr) {
  if (x.height % 2 != 0 || x.width % 2 != 0) {
    throw Error(Errc::ShapeMismatch, "max pooling needs even sides, got " + shape_string(x));
  }
  FeatureMap<Scalar> y(x.depth(), x.height / 2, x.width / 2);
  if (argmax) argmax->assign(std::size_t(y.data.size()), 0);
  for (Index p = 0; p < y.pixels(); ++p) {
    const Index oy = p / y.width, ox = p % y.width;
    const Index base = 2 * oy * x.width + 2 * ox;
    const Index cand[4] = {base, base + 1, base + x.width, base + x.width + 1};
    for (Index c = 0; c < x.depth(); ++c) {
      Index best = cand[0];
      for (int i = 1; i < 4; ++i) {
        if (x.data(c, cand[i]) > x.data(c, best)) best = cand[i];
      }
      y.data(c, p) = x.data(c, best);
      if (argmax) (*argmax)[std::size_t(p * x.depth() + c)] = best;
    }
  }
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> max_pool2x2_backward(const FeatureMap<Scalar>& x, const std::vector<Index>& argmax,
                                        const FeatureMap<Scalar>& grad_out) {
  FeatureMap<Scalar> g(x.depth(), x.height, x.width);
  for (Index p = 0; p < grad_out.pixels(); ++p) {
    for (Index c = 0; c < x.depth(); ++c) {
      g.data(c, argmax[std::size_t(p * x.depth() + c)]) += grad_out.data(c, p);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseMax(typename Derived::Scalar(0));
}

/// Zeroes `grad` wherever the (post-ReLU) activation is not positive.
template <typename Scalar>
void relu_backward_inplace(const Mat<Scalar>& activation, Mat<Scalar>& grad) {
  grad = (activation.array() > Scalar(0)).select(grad, Scalar(0));
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// Depth-wise tiling: [x; x; ...; x] with `copies` blocks.
template <typename Scalar>
FeatureMap<Scalar> tile_depth(const FeatureMap<Scalar>& x, Index copies) {
  return FeatureMap<Scalar>(x.height, x.width, x.data.replicate(copies, 1));
}

template <typename Scalar>
FeatureMap<Scalar> concat_depth(const FeatureMap<Scalar>& a, const FeatureMap<Scalar>& b) {
  if (a.height != b.height || a.width != b.width) {
    throw Error(Errc::ShapeMismatch, "cannot concatenate " + shape_string(a) + " with " + shape_string(b));
  }
  Mat<Scalar> out(a.depth() + b.depth(), a.pixels());
  out << a.data, b.data;
  return FeatureMap<Scalar>(a.height, a.width, std::move(out));
}

}  // namespace cloudnet
