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

#include "eesp/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eesp/errors.hpp"

namespace eesp::oracle {

Tensor naive_conv(const ConvSpec& spec, const Tensor& w, const Tensor* bias, const Tensor& x,
                  std::uint64_t* macs) {
  validate(spec);
  const bool one_d = spec.spatial_rank == 1;
  const long N = static_cast<long>(x.dim(0));
  const long C = static_cast<long>(x.dim(1));
  const long H = one_d ? 1 : static_cast<long>(x.dim(2));
  const long W = static_cast<long>(one_d ? x.dim(2) : x.dim(3));
  if (C != static_cast<long>(spec.in_channels)) throw ShapeError("naive_conv: channel mismatch");
  const long K = static_cast<long>(spec.kernel);
  const long kh = one_d ? 1 : K;
  const long s = static_cast<long>(spec.stride), r = static_cast<long>(spec.dilation);
  const long p = static_cast<long>(spec.padding);
  const long ph = one_d ? 0 : p;
  const long OH = (H + 2 * ph - r * (kh - 1) - 1) / s + 1;
  const long OW = (W + 2 * p - r * (K - 1) - 1) / s + 1;
  const long CO = static_cast<long>(spec.out_channels);
  const long G = static_cast<long>(spec.groups);
  const long cin_g = C / G, cout_g = CO / G;

  Shape out_shape = one_d ? Shape{x.dim(0), spec.out_channels, static_cast<std::size_t>(OW)}
                          : Shape{x.dim(0), spec.out_channels, static_cast<std::size_t>(OH),
                                  static_cast<std::size_t>(OW)};
  Tensor out(out_shape);
  auto X = x.data();
  auto Wt = w.data();
  auto Y = out.data();
  std::uint64_t count = 0;
  for (long n = 0; n < N; ++n)
    for (long co = 0; co < CO; ++co) {
      const long g = co / cout_g;
      for (long oy = 0; oy < OH; ++oy)
        for (long ox = 0; ox < OW; ++ox) {
          double acc = bias ? bias->data()[static_cast<std::size_t>(co)] : 0.0;
          for (long ci = 0; ci < cin_g; ++ci)
            for (long ky = 0; ky < kh; ++ky)
              for (long kx = 0; kx < K; ++kx) {
                ++count;
                const long iy = oy * s - ph + ky * r;
                const long ix = ox * s - p + kx * r;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                const long c = g * cin_g + ci;
                const double xv = X[static_cast<std::size_t>(((n * C + c) * H + iy) * W + ix)];
                const double wv =
                    Wt[static_cast<std::size_t>(((co * cin_g + ci) * kh + ky) * K + kx)];
                acc += xv * wv;
              }
          Y[static_cast<std::size_t>(((n * CO + co) * OH + oy) * OW + ox)] = acc;
        }
    }
  if (macs) *macs = count;
  return out;
}

Tensor random_tensor(const Shape& shape, Rng& rng) {
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

double relative_error(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("relative_error: shape mismatch");
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  if (denom == 0.0) return 0.0;
  return std::sqrt(diff) / denom;
}

GradCheck check_gradient(const std::function<ag::Var()>& loss, ag::Var& wrt, double step,
                         std::size_t max_elements, std::uint64_t seed) {
  wrt.zero_grad();
  ag::backward(loss());
  const Tensor full = wrt.grad();

  const std::size_t n = wrt.value().numel();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n > max_elements) {
    Rng rng(seed);
    for (std::size_t i = 0; i < max_elements; ++i) {
      std::swap(idx[i], idx[i + rng.below(n - i)]);
    }
    idx.resize(max_elements);
    std::sort(idx.begin(), idx.end());
  }

  GradCheck out;
  out.checked = idx.size();
  out.analytic = Tensor({idx.size()});
  out.numeric = Tensor({idx.size()});
  Tensor& value = wrt.mutable_value();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    const double saved = value[i];
    value[i] = saved + step;
    const double up = loss().value()[0];
    value[i] = saved - step;
    const double down = loss().value()[0];
    value[i] = saved;
    out.numeric[k] = (up - down) / (2.0 * step);
    out.analytic[k] = full[i];
  }
  wrt.zero_grad();
  out.rel_error = relative_error(out.analytic, out.numeric);
  return out;
}

ag::Var random_projection(const ag::Var& out, std::uint64_t seed) {
  Rng rng(seed);
  return ag::weighted_sum(out, random_tensor(out.shape(), rng));
}

}  // namespace eesp::oracle
