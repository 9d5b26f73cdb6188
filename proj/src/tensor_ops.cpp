// Copyright 2026 The EESPNet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eesp/tensor_ops.hpp"

#include <algorithm>

namespace eesp {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                     " vs " + to_string(b.shape()));
  }
}

template <class F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
  require_same(a, b, op);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

// Returns the channel index function parameters for per-channel ops.
struct ChannelLayout {
  std::size_t batch;
  std::size_t channels;
  std::size_t inner;
};

ChannelLayout layout_of(const Tensor& x) {
  if (x.rank() < 2) return {1, 1, x.numel()};
  return {x.dim(0), x.channels(), x.spatial_size()};
}

ChannelLayout prelu_layout(const Tensor& x, const Tensor& slopes) {
  ChannelLayout l = layout_of(x);
  if (slopes.numel() == 1) return {1, 1, x.numel()};
  if (slopes.numel() != l.channels) {
    throw ShapeError("prelu: " + std::to_string(slopes.numel()) + " slopes for " +
                     std::to_string(l.channels) + " channels");
  }
  return l;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (auto& v : out.data()) v *= s;
  return out;
}

Tensor prelu(const Tensor& x, const Tensor& slopes) {
  const ChannelLayout l = prelu_layout(x, slopes);
  Tensor out(x.shape());
  std::size_t i = 0;
  for (std::size_t n = 0; n < l.batch; ++n) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      const double a = slopes[c];
      for (std::size_t s = 0; s < l.inner; ++s, ++i) {
        out[i] = x[i] >= 0.0 ? x[i] : a * x[i];
      }
    }
  }
  return out;
}

PreluGrads prelu_backward(const Tensor& x, const Tensor& slopes, const Tensor& grad_out) {
  require_same(x, grad_out, "prelu_backward");
  const ChannelLayout l = prelu_layout(x, slopes);
  PreluGrads g{Tensor(x.shape()), Tensor(slopes.shape())};
  std::size_t i = 0;
  for (std::size_t n = 0; n < l.batch; ++n) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      const double a = slopes[c];
      for (std::size_t s = 0; s < l.inner; ++s, ++i) {
        if (x[i] >= 0.0) {
          g.grad_x[i] = grad_out[i];
        } else {
          g.grad_x[i] = a * grad_out[i];
          g.grad_slopes[c] += grad_out[i] * x[i];
        }
      }
    }
  }
  return g;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
  const Tensor& first = parts.front();
  if (first.rank() < 2) throw ShapeError("concat_channels: rank must be >= 2");
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != first.rank() || p.dim(0) != first.dim(0) ||
        p.spatial_size() != first.spatial_size() ||
        !std::equal(p.shape().begin() + 2, p.shape().end(), first.shape().begin() + 2)) {
      throw ShapeError("concat_channels: " + to_string(p.shape()) + " does not match " +
                       to_string(first.shape()));
    }
    total += p.channels();
  }
  Shape shape = first.shape();
  shape[1] = total;
  Tensor out(shape);
  const std::size_t inner = first.spatial_size();
  const std::size_t batch = first.dim(0);
  double* dst = out.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    for (const Tensor& p : parts) {
      const std::size_t block = p.channels() * inner;
      const double* src = p.data().data() + n * block;
      dst = std::copy(src, src + block, dst);
    }
  }
  return out;
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end) {
  if (x.rank() < 2 || begin >= end || end > x.channels()) {
    throw ShapeError("slice_channels: invalid range [" + std::to_string(begin) + "," +
                     std::to_string(end) + ") for " + to_string(x.shape()));
  }
  Shape shape = x.shape();
  shape[1] = end - begin;
  Tensor out(shape);
  const std::size_t inner = x.spatial_size();
  const std::size_t width = (end - begin) * inner;
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    const double* src = x.data().data() + (n * x.channels() + begin) * inner;
    std::copy(src, src + width, out.data().data() + n * width);
  }
  return out;
}

BatchNormState::BatchNormState(std::size_t channels, double eps_, double momentum_)
    : running_mean({channels}, 0.0), running_var({channels}, 1.0), eps(eps_),
      momentum(momentum_) {}

Tensor batch_norm(const Tensor& x, const Tensor& scale, const Tensor& shift,
                  BatchNormState& state, Mode mode, BatchNormCache* cache) {
  const ChannelLayout l = layout_of(x);
  if (x.rank() < 2 || scale.numel() != l.channels || shift.numel() != l.channels ||
      state.running_mean.numel() != l.channels) {
    throw ShapeError("batch_norm: parameters do not match " + std::to_string(l.channels) +
                     " channels of " + to_string(x.shape()));
  }
  const std::size_t count = l.batch * l.inner;
  std::vector<double> mean(l.channels), var(l.channels);
  if (mode == Mode::train) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      double s = 0.0;
      for (std::size_t n = 0; n < l.batch; ++n) {
        const double* p = x.data().data() + (n * l.channels + c) * l.inner;
        for (std::size_t i = 0; i < l.inner; ++i) s += p[i];
      }
      mean[c] = s / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < l.batch; ++n) {
        const double* p = x.data().data() + (n * l.channels + c) * l.inner;
        for (std::size_t i = 0; i < l.inner; ++i) sq += (p[i] - mean[c]) * (p[i] - mean[c]);
      }
      var[c] = sq / static_cast<double>(count);
      // Running variance tracks the unbiased estimate.
      const double unbiased =
          count > 1 ? var[c] * static_cast<double>(count) / static_cast<double>(count - 1)
                    : var[c];
      state.running_mean[c] =
          (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean[c];
      state.running_var[c] =
          (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < l.channels; ++c) {
      mean[c] = state.running_mean[c];
      var[c] = state.running_var[c];
    }
  }

  Tensor out(x.shape());
  Tensor x_hat(x.shape());
  std::vector<double> inv_std(l.channels);
  for (std::size_t c = 0; c < l.channels; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + state.eps);
  std::size_t i = 0;
  for (std::size_t n = 0; n < l.batch; ++n) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      for (std::size_t s = 0; s < l.inner; ++s, ++i) {
        x_hat[i] = (x[i] - mean[c]) * inv_std[c];
        out[i] = scale[c] * x_hat[i] + shift[c];
      }
    }
  }
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
    cache->mode = mode;
  }
  return out;
}

BatchNormGrads batch_norm_backward(const Tensor& grad_out, const Tensor& scale,
                                   const BatchNormCache& cache) {
  require_same(grad_out, cache.x_hat, "batch_norm_backward");
  const ChannelLayout l = layout_of(grad_out);
  BatchNormGrads g{Tensor(grad_out.shape()), Tensor({l.channels}), Tensor({l.channels})};
  for (std::size_t n = 0; n < l.batch; ++n) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      const std::size_t base = (n * l.channels + c) * l.inner;
      for (std::size_t s = 0; s < l.inner; ++s) {
        g.grad_shift[c] += grad_out[base + s];
        g.grad_scale[c] += grad_out[base + s] * cache.x_hat[base + s];
      }
    }
  }
  const double m = static_cast<double>(l.batch * l.inner);
  for (std::size_t n = 0; n < l.batch; ++n) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      const std::size_t base = (n * l.channels + c) * l.inner;
      const double k = scale[c] * cache.inv_std[c];
      for (std::size_t s = 0; s < l.inner; ++s) {
        const double dy = grad_out[base + s];
        if (cache.mode == Mode::train) {
          g.grad_x[base + s] =
              k * (dy - g.grad_shift[c] / m - cache.x_hat[base + s] * g.grad_scale[c] / m);
        } else {
          g.grad_x[base + s] = k * dy;
        }
      }
    }
  }
  return g;
}

namespace {

std::size_t pooled_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                          std::size_t padding) {
  if (in + 2 * padding < kernel) throw ShapeError("avg_pool2d: input smaller than kernel");
  return (in + 2 * padding - kernel) / stride + 1;
}

}  // namespace

Tensor avg_pool2d(const Tensor& x, std::size_t kernel, std::size_t stride,
                  std::size_t padding) {
  if (x.rank() != 4) throw ShapeError("avg_pool2d expects rank-4 input, got " + to_string(x.shape()));
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t OH = pooled_extent(H, kernel, stride, padding);
  const std::size_t OW = pooled_extent(W, kernel, stride, padding);
  Tensor out({N, C, OH, OW});
  const double inv = 1.0 / static_cast<double>(kernel * kernel);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t oh = 0; oh < OH; ++oh) {
        for (std::size_t ow = 0; ow < OW; ++ow) {
          double s = 0.0;
          for (std::size_t kh = 0; kh < kernel; ++kh) {
            const auto ih = static_cast<std::ptrdiff_t>(oh * stride + kh) -
                            static_cast<std::ptrdiff_t>(padding);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t kw = 0; kw < kernel; ++kw) {
              const auto iw = static_cast<std::ptrdiff_t>(ow * stride + kw) -
                              static_cast<std::ptrdiff_t>(padding);
              if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
              s += x.at(n, c, static_cast<std::size_t>(ih), static_cast<std::size_t>(iw));
            }
          }
          out.at(n, c, oh, ow) = s * inv;
        }
      }
    }
  }
  return out;
}

Tensor avg_pool2d_backward(const Shape& input_shape, const Tensor& grad_out,
                           std::size_t kernel, std::size_t stride, std::size_t padding) {
  Tensor grad(input_shape);
  const std::size_t N = input_shape[0], C = input_shape[1], H = input_shape[2],
                    W = input_shape[3];
  const std::size_t OH = pooled_extent(H, kernel, stride, padding);
  const std::size_t OW = pooled_extent(W, kernel, stride, padding);
  if (grad_out.shape() != Shape{N, C, OH, OW}) {
    throw ShapeError("avg_pool2d_backward: gradient shape " + to_string(grad_out.shape()));
  }
  const double inv = 1.0 / static_cast<double>(kernel * kernel);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t oh = 0; oh < OH; ++oh) {
        for (std::size_t ow = 0; ow < OW; ++ow) {
          const double g = grad_out.at(n, c, oh, ow) * inv;
          for (std::size_t kh = 0; kh < kernel; ++kh) {
            const auto ih = static_cast<std::ptrdiff_t>(oh * stride + kh) -
                            static_cast<std::ptrdiff_t>(padding);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t kw = 0; kw < kernel; ++kw) {
              const auto iw = static_cast<std::ptrdiff_t>(ow * stride + kw) -
                              static_cast<std::ptrdiff_t>(padding);
              if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
              grad.at(n, c, static_cast<std::size_t>(ih), static_cast<std::size_t>(iw)) += g;
            }
          }
        }
      }
    }
  }
  return grad;
}

Tensor global_avg_pool(const Tensor& x) {
  if (x.rank() < 3) throw ShapeError("global_avg_pool expects spatial input");
  const std::size_t N = x.dim(0), C = x.dim(1), S = x.spatial_size();
  Tensor out({N, C});
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      const double* p = x.data().data() + (n * C + c) * S;
      double s = 0.0;
      for (std::size_t i = 0; i < S; ++i) s += p[i];
      out[n * C + c] = s / static_cast<double>(S);
    }
  }
  return out;
}

}  // namespace eesp
