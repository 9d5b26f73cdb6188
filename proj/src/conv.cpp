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

#include "eesp/conv.hpp"

#include <algorithm>
#include <vector>

#include "eesp/errors.hpp"
#include "eesp/tensor_ops.hpp"

namespace eesp {

std::string to_string(ConvKind kind) {
  switch (kind) {
    case ConvKind::standard: return "standard";
    case ConvKind::group: return "group";
    case ConvKind::depthwise: return "depthwise";
    case ConvKind::depthwise_dilated: return "depthwise_dilated";
    case ConvKind::pointwise: return "pointwise";
  }
  return "unknown";
}

namespace {

std::size_t same_padding(std::size_t n, std::size_t r) { return r * (n - 1) / 2; }

}  // namespace

ConvSpec ConvSpec::standard(std::size_t c, std::size_t c_out, std::size_t n,
                            std::size_t stride, std::size_t dilation) {
  return {ConvKind::standard, c, c_out, n, stride, dilation, 1, same_padding(n, dilation)};
}

ConvSpec ConvSpec::group(std::size_t c, std::size_t c_out, std::size_t n, std::size_t groups,
                         std::size_t stride, std::size_t dilation) {
  return {ConvKind::group, c, c_out, n, stride, dilation, groups, same_padding(n, dilation)};
}

ConvSpec ConvSpec::depthwise(std::size_t c, std::size_t n, std::size_t stride) {
  return {ConvKind::depthwise, c, c, n, stride, 1, c, same_padding(n, 1)};
}

ConvSpec ConvSpec::depthwise_dilated(std::size_t c, std::size_t n, std::size_t dilation,
                                     std::size_t stride) {
  return {ConvKind::depthwise_dilated, c, c, n, stride, dilation, c, same_padding(n, dilation)};
}

ConvSpec ConvSpec::pointwise(std::size_t c, std::size_t c_out) {
  return {ConvKind::pointwise, c, c_out, 1, 1, 1, 1, 0};
}

ConvSpec ConvSpec::with_rank(std::size_t rank) const {
  ConvSpec s = *this;
  s.spatial_rank = rank;
  return s;
}

ConvSpec ConvSpec::with_bias(bool bias) const {
  ConvSpec s = *this;
  s.has_bias = bias;
  return s;
}

std::size_t ConvSpec::fan_in() const {
  std::size_t taps = spatial_rank == 2 ? kernel * kernel : kernel;
  return taps * in_channels / groups;
}

Shape ConvSpec::weight_shape() const {
  if (spatial_rank == 1) return {out_channels, in_channels / groups, kernel};
  return {out_channels, in_channels / groups, kernel, kernel};
}

void validate(const ConvSpec& s) {
  auto fail = [&](const std::string& why) {
    throw SpecError(to_string(s.kind) + " conv: " + why);
  };
  if (s.in_channels == 0 || s.out_channels == 0) fail("channel counts must be >= 1");
  if (s.kernel == 0 || s.kernel % 2 == 0) fail("kernel must be a positive odd integer");
  if (s.stride == 0) fail("stride must be >= 1");
  if (s.dilation == 0) fail("dilation must be >= 1");
  if (s.groups == 0) fail("groups must be >= 1");
  if (s.spatial_rank != 1 && s.spatial_rank != 2) fail("spatial rank must be 1 or 2");
  if (s.in_channels % s.groups != 0 || s.out_channels % s.groups != 0) {
    fail("channels (" + std::to_string(s.in_channels) + "->" +
         std::to_string(s.out_channels) + ") not divisible by groups " +
         std::to_string(s.groups));
  }
  switch (s.kind) {
    case ConvKind::standard:
      if (s.groups != 1) fail("standard convolution has a single group");
      break;
    case ConvKind::group:
      break;
    case ConvKind::depthwise:
    case ConvKind::depthwise_dilated:
      if (s.out_channels != s.in_channels || s.groups != s.in_channels) {
        fail("depth-wise convolution needs c_out == c == groups");
      }
      if (s.kind == ConvKind::depthwise && s.dilation != 1) {
        fail("plain depth-wise convolution has dilation 1");
      }
      break;
    case ConvKind::pointwise:
      if (s.kernel != 1 || s.dilation != 1 || s.groups != 1) {
        fail("point-wise convolution needs n == 1, r == 1, g == 1");
      }
      break;
  }
}

std::uint64_t weight_count(const ConvSpec& spec) {
  validate(spec);
  const std::uint64_t taps =
      spec.spatial_rank == 2 ? std::uint64_t{spec.kernel} * spec.kernel : spec.kernel;
  return taps * spec.in_channels * spec.out_channels / spec.groups;
}

std::uint64_t param_count(const ConvSpec& spec) {
  return weight_count(spec) + (spec.has_bias ? spec.out_channels : 0);
}

std::uint64_t mac_count(const ConvSpec& spec, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw ShapeError("mac_count: output extents must be >= 1");
  return weight_count(spec) * out_h * out_w;
}

SeparableSpec SeparableSpec::make(std::size_t n, std::size_t c, std::size_t c_out,
                                  std::size_t dilation, std::size_t stride) {
  return {ConvSpec::depthwise_dilated(c, n, dilation, stride), ConvSpec::pointwise(c, c_out)};
}

std::uint64_t param_count(const SeparableSpec& spec) {
  return param_count(spec.depthwise) + param_count(spec.pointwise);
}

std::uint64_t mac_count(const SeparableSpec& spec, std::size_t out_h, std::size_t out_w) {
  return mac_count(spec.depthwise, out_h, out_w) + mac_count(spec.pointwise, out_h, out_w);
}

std::size_t effective_receptive_field(std::size_t n, std::size_t r) {
  if (n == 0 || n % 2 == 0) throw SpecError("kernel size must be odd, got " + std::to_string(n));
  if (r == 0) throw SpecError("dilation must be >= 1");
  return (n - 1) * r + 1;
}

Ratio cost_reduction_separable(std::size_t n, std::size_t c, std::size_t c_out) {
  const std::uint64_t n2 = std::uint64_t{n} * n;
  return {n2 * c * c_out, n2 * c + std::uint64_t{c} * c_out};
}

namespace {

struct Geometry {
  std::size_t batch, in_c, in_h, in_w;
  std::size_t out_c, out_h, out_w;
  std::size_t kh, kw, sh, sw, dh, dw, ph, pw;
  std::size_t groups;

  std::size_t in_per_group() const { return in_c / groups; }
  std::size_t out_per_group() const { return out_c / groups; }
  std::size_t taps() const { return kh * kw; }
  std::size_t col_rows() const { return in_per_group() * taps(); }
  std::size_t out_area() const { return out_h * out_w; }
};

std::size_t conv_extent(std::size_t in, std::size_t pad, std::size_t eff, std::size_t stride) {
  if (in + 2 * pad < eff) {
    throw ShapeError("input extent " + std::to_string(in) + " too small for effective kernel " +
                     std::to_string(eff));
  }
  return (in + 2 * pad - eff) / stride + 1;
}

Geometry geometry(const ConvSpec& s, const Shape& x) {
  validate(s);
  const std::size_t want_rank = s.spatial_rank + 2;
  if (x.size() != want_rank) {
    throw ShapeError(std::to_string(s.spatial_rank) + "D conv expects rank-" +
                     std::to_string(want_rank) + " input, got " + to_string(x));
  }
  if (x[1] != s.in_channels) {
    throw ShapeError("conv expects " + std::to_string(s.in_channels) + " channels, got " +
                     std::to_string(x[1]));
  }
  Geometry g{};
  g.batch = x[0];
  g.in_c = s.in_channels;
  g.out_c = s.out_channels;
  g.groups = s.groups;
  if (s.spatial_rank == 2) {
    g.in_h = x[2];
    g.in_w = x[3];
    g.kh = g.kw = s.kernel;
    g.sh = g.sw = s.stride;
    g.dh = g.dw = s.dilation;
    g.ph = g.pw = s.padding;
  } else {
    g.in_h = 1;
    g.in_w = x[2];
    g.kh = 1;
    g.kw = s.kernel;
    g.sh = 1;
    g.sw = s.stride;
    g.dh = 1;
    g.dw = s.dilation;
    g.ph = 0;
    g.pw = s.padding;
  }
  g.out_h = conv_extent(g.in_h, g.ph, (g.kh - 1) * g.dh + 1, g.sh);
  g.out_w = conv_extent(g.in_w, g.pw, (g.kw - 1) * g.dw + 1, g.sw);
  return g;
}

Shape output_shape(const ConvSpec& s, const Geometry& g) {
  if (s.spatial_rank == 1) return {g.batch, g.out_c, g.out_w};
  return {g.batch, g.out_c, g.out_h, g.out_w};
}

void check_weights(const ConvSpec& s, const Tensor& w, const Tensor* bias) {
  if (w.shape() != s.weight_shape()) {
    throw ShapeError("conv weights " + to_string(w.shape()) + " do not match spec shape " +
                     to_string(s.weight_shape()));
  }
  if (bias && bias->numel() != s.out_channels) {
    throw ShapeError("conv bias has " + std::to_string(bias->numel()) + " entries, expected " +
                     std::to_string(s.out_channels));
  }
}

// Fills col[(ic * kh + i) * kw + j][oh * out_w + ow] for one image and group.
void im2col(const Geometry& g, const double* image, std::size_t group, std::vector<double>& col) {
  const std::size_t area = g.out_area();
  col.assign(g.col_rows() * area, 0.0);
  for (std::size_t ic = 0; ic < g.in_per_group(); ++ic) {
    const double* plane = image + (group * g.in_per_group() + ic) * g.in_h * g.in_w;
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        double* row = col.data() + ((ic * g.kh + i) * g.kw + j) * area;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * g.sh + i * g.dh) -
                          static_cast<std::ptrdiff_t>(g.ph);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
          const double* src = plane + static_cast<std::size_t>(ih) * g.in_w;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const auto iw = static_cast<std::ptrdiff_t>(ow * g.sw + j * g.dw) -
                            static_cast<std::ptrdiff_t>(g.pw);
            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
            row[oh * g.out_w + ow] = src[iw];
          }
        }
      }
    }
  }
}

void col2im_add(const Geometry& g, const std::vector<double>& col, std::size_t group,
                double* image) {
  const std::size_t area = g.out_area();
  for (std::size_t ic = 0; ic < g.in_per_group(); ++ic) {
    double* plane = image + (group * g.in_per_group() + ic) * g.in_h * g.in_w;
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const double* row = col.data() + ((ic * g.kh + i) * g.kw + j) * area;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * g.sh + i * g.dh) -
                          static_cast<std::ptrdiff_t>(g.ph);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
          double* dst = plane + static_cast<std::size_t>(ih) * g.in_w;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const auto iw = static_cast<std::ptrdiff_t>(ow * g.sw + j * g.dw) -
                            static_cast<std::ptrdiff_t>(g.pw);
            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
            dst[iw] += row[oh * g.out_w + ow];
          }
        }
      }
    }
  }
}

}  // namespace

std::pair<std::size_t, std::size_t> output_extent(const ConvSpec& spec, std::size_t in_h,
                                                  std::size_t in_w) {
  validate(spec);
  const std::size_t eff = spec.effective_kernel();
  const std::size_t w = conv_extent(in_w, spec.padding, eff, spec.stride);
  if (spec.spatial_rank == 1) return {1, w};
  return {conv_extent(in_h, spec.padding, eff, spec.stride), w};
}

ConvLayer make_conv_layer(const ConvSpec& spec, Rng rng) {
  validate(spec);
  ConvLayer layer{spec, he_init(spec.fan_in(), spec.weight_shape(), rng), std::nullopt};
  if (spec.has_bias) layer.bias = Tensor({spec.out_channels});
  return layer;
}

Tensor conv_forward(const ConvSpec& spec, const Tensor& weights, const Tensor* bias,
                    const Tensor& x) {
  const Geometry g = geometry(spec, x.shape());
  check_weights(spec, weights, bias);
  Tensor out(output_shape(spec, g));
  const std::size_t area = g.out_area();
  const std::size_t rows = g.col_rows();
  std::vector<double> col;
  for (std::size_t n = 0; n < g.batch; ++n) {
    const double* image = x.data().data() + n * g.in_c * g.in_h * g.in_w;
    for (std::size_t grp = 0; grp < g.groups; ++grp) {
      im2col(g, image, grp, col);
      for (std::size_t o = 0; o < g.out_per_group(); ++o) {
        const std::size_t oc = grp * g.out_per_group() + o;
        const double* w = weights.data().data() + oc * rows;
        double* dst = out.data().data() + (n * g.out_c + oc) * area;
        for (std::size_t k = 0; k < rows; ++k) {
          const double wk = w[k];
          const double* src = col.data() + k * area;
          for (std::size_t p = 0; p < area; ++p) dst[p] += wk * src[p];
        }
        if (bias) {
          for (std::size_t p = 0; p < area; ++p) dst[p] += (*bias)[oc];
        }
      }
    }
  }
  return out;
}

Tensor conv_forward(const ConvLayer& layer, const Tensor& x) {
  return conv_forward(layer.spec, layer.weights, layer.bias ? &*layer.bias : nullptr, x);
}

Tensor conv_forward_direct(const ConvLayer& layer, const Tensor& x) {
  const ConvSpec& s = layer.spec;
  const Geometry g = geometry(s, x.shape());
  const Tensor* bias = layer.bias ? &*layer.bias : nullptr;
  check_weights(s, layer.weights, bias);
  Tensor out(output_shape(s, g));
  const double* in = x.data().data();
  const double* w = layer.weights.data().data();
  double* dst = out.data().data();
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t oc = 0; oc < g.out_c; ++oc) {
      const std::size_t grp = oc / g.out_per_group();
      for (std::size_t oh = 0; oh < g.out_h; ++oh) {
        for (std::size_t ow = 0; ow < g.out_w; ++ow) {
          double acc = 0.0;
          for (std::size_t ic = 0; ic < g.in_per_group(); ++ic) {
            const std::size_t c = grp * g.in_per_group() + ic;
            for (std::size_t i = 0; i < g.kh; ++i) {
              const auto ih = static_cast<std::ptrdiff_t>(oh * g.sh + i * g.dh) -
                              static_cast<std::ptrdiff_t>(g.ph);
              for (std::size_t j = 0; j < g.kw; ++j) {
                const auto iw = static_cast<std::ptrdiff_t>(ow * g.sw + j * g.dw) -
                                static_cast<std::ptrdiff_t>(g.pw);
                double v = 0.0;
                if (ih >= 0 && ih < static_cast<std::ptrdiff_t>(g.in_h) && iw >= 0 &&
                    iw < static_cast<std::ptrdiff_t>(g.in_w)) {
                  v = in[((n * g.in_c + c) * g.in_h + static_cast<std::size_t>(ih)) * g.in_w +
                         static_cast<std::size_t>(iw)];
                }
                acc += w[((oc * g.in_per_group() + ic) * g.kh + i) * g.kw + j] * v;
              }
            }
          }
          if (bias) acc += (*bias)[oc];
          dst[((n * g.out_c + oc) * g.out_h + oh) * g.out_w + ow] = acc;
        }
      }
    }
  }
  return out;
}

ConvGrads conv_backward(const ConvSpec& spec, const Tensor& weights, bool has_bias,
                        const Tensor& x, const Tensor& grad_out) {
  const Geometry g = geometry(spec, x.shape());
  check_weights(spec, weights, nullptr);
  if (grad_out.shape() != output_shape(spec, g)) {
    throw ShapeError("conv_backward: gradient shape " + to_string(grad_out.shape()) +
                     " does not match output " + to_string(output_shape(spec, g)));
  }
  ConvGrads grads{Tensor(x.shape()), Tensor(weights.shape()), std::nullopt};
  if (has_bias) grads.grad_b = Tensor({g.out_c});
  const std::size_t area = g.out_area();
  const std::size_t rows = g.col_rows();
  std::vector<double> col, grad_col;
  for (std::size_t n = 0; n < g.batch; ++n) {
    const std::size_t image_offset = n * g.in_c * g.in_h * g.in_w;
    for (std::size_t grp = 0; grp < g.groups; ++grp) {
      im2col(g, x.data().data() + image_offset, grp, col);
      grad_col.assign(rows * area, 0.0);
      for (std::size_t o = 0; o < g.out_per_group(); ++o) {
        const std::size_t oc = grp * g.out_per_group() + o;
        const double* go = grad_out.data().data() + (n * g.out_c + oc) * area;
        const double* w = weights.data().data() + oc * rows;
        double* gw = grads.grad_w.data().data() + oc * rows;
        for (std::size_t k = 0; k < rows; ++k) {
          const double* c = col.data() + k * area;
          double* gc = grad_col.data() + k * area;
          double acc = 0.0;
          const double wk = w[k];
          for (std::size_t p = 0; p < area; ++p) {
            acc += go[p] * c[p];
            gc[p] += wk * go[p];
          }
          gw[k] += acc;
        }
        if (has_bias) {
          double s = 0.0;
          for (std::size_t p = 0; p < area; ++p) s += go[p];
          (*grads.grad_b)[oc] += s;
        }
      }
      col2im_add(g, grad_col, grp, grads.grad_x.data().data() + image_offset);
    }
  }
  return grads;
}

ConvGrads conv_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out) {
  return conv_backward(layer.spec, layer.weights, layer.bias.has_value(), x, grad_out);
}

}  // namespace eesp
