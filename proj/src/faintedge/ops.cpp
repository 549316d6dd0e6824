/*
 * Copyright 2026 The faintedge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "faintedge/ops.hpp"

#include <algorithm>
#include <cmath>

namespace faintedge {
namespace {

void require_same_dtype(const char* op, const Tensor& a, const Tensor& b) {
  if (a.dtype() != b.dtype())
    throw DimensionError(std::string(op) + ": dtype mismatch " + to_string(a.dtype()) + " vs " +
                         to_string(b.dtype()));
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
  require_same_dtype(op, a, b);
}

struct ConvGeometry {
  std::int64_t n, c, h, w;
  std::int64_t o, kh, kw;
  std::int64_t oh, ow;
  int stride, pad;
  std::int64_t k() const { return c * kh * kw; }
  std::int64_t p() const { return oh * ow; }
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& weight, const Tensor& bias,
                           int stride, int pad) {
  const auto& is = input.shape();
  const auto& ws = weight.shape();
  require_same_dtype("conv2d", input, weight);
  if (ws.c() != is.c())
    throw DimensionError("conv2d: input " + is.str() + " has " + std::to_string(is.c()) +
                         " channels but weight " + ws.str() + " expects " + std::to_string(ws.c()));
  if (bias.defined()) {
    require_same_dtype("conv2d", input, bias);
    if (bias.numel() != ws.n())
      throw DimensionError("conv2d: bias " + bias.shape().str() + " does not match weight " +
                           ws.str());
  }
  if (stride < 1) throw GeometryError("conv2d: stride must be positive");
  if (pad < 0) throw GeometryError("conv2d: padding must be non-negative");
  ConvGeometry g{is.n(), is.c(), is.h(), is.w(), ws.n(), ws.h(), ws.w(), 0, 0, stride, pad};
  const auto span_h = is.h() + 2 * pad - ws.h();
  const auto span_w = is.w() + 2 * pad - ws.w();
  if (span_h < 0 || span_w < 0 || span_h % stride != 0 || span_w % stride != 0)
    throw GeometryError("conv2d: input " + is.str() + " with kernel " + std::to_string(ws.h()) +
                        "x" + std::to_string(ws.w()) + ", stride " + std::to_string(stride) +
                        ", pad " + std::to_string(pad) + " gives a non-integral output size");
  g.oh = span_h / stride + 1;
  g.ow = span_w / stride + 1;
  return g;
}

// Columns for output pixels [p0, p0 + count) of one image; row k = (c, ky, kx).
template <class T>
void im2col(const ConvGeometry& g, const T* image, std::int64_t p0, std::int64_t count, T* col) {
  for (std::int64_t c = 0; c < g.c; ++c) {
    const T* plane = image + c * g.h * g.w;
    for (std::int64_t ky = 0; ky < g.kh; ++ky) {
      for (std::int64_t kx = 0; kx < g.kw; ++kx) {
        T* dst = col + ((c * g.kh + ky) * g.kw + kx) * count;
        std::int64_t oy = p0 / g.ow;
        std::int64_t ox = p0 % g.ow;
        for (std::int64_t i = 0; i < count;) {
          const std::int64_t iy = oy * g.stride - g.pad + ky;
          const std::int64_t run = std::min(count - i, g.ow - ox);
          if (iy < 0 || iy >= g.h) {
            std::fill(dst + i, dst + i + run, T(0));
          } else {
            const T* row = plane + iy * g.w;
            for (std::int64_t r = 0; r < run; ++r) {
              const std::int64_t ix = (ox + r) * g.stride - g.pad + kx;
              dst[i + r] = (ix >= 0 && ix < g.w) ? row[ix] : T(0);
            }
          }
          i += run;
          ox = 0;
          ++oy;
        }
      }
    }
  }
}

template <class T>
void col2im_add(const ConvGeometry& g, const T* col, std::int64_t p0, std::int64_t count, T* image) {
  for (std::int64_t c = 0; c < g.c; ++c) {
    T* plane = image + c * g.h * g.w;
    for (std::int64_t ky = 0; ky < g.kh; ++ky) {
      for (std::int64_t kx = 0; kx < g.kw; ++kx) {
        const T* src = col + ((c * g.kh + ky) * g.kw + kx) * count;
        std::int64_t oy = p0 / g.ow;
        std::int64_t ox = p0 % g.ow;
        for (std::int64_t i = 0; i < count;) {
          const std::int64_t iy = oy * g.stride - g.pad + ky;
          const std::int64_t run = std::min(count - i, g.ow - ox);
          if (iy >= 0 && iy < g.h) {
            T* row = plane + iy * g.w;
            for (std::int64_t r = 0; r < run; ++r) {
              const std::int64_t ix = (ox + r) * g.stride - g.pad + kx;
              if (ix >= 0 && ix < g.w) row[ix] += src[i + r];
            }
          }
          i += run;
          ox = 0;
          ++oy;
        }
      }
    }
  }
}

std::int64_t tile_pixels(const ConvGeometry& g) {
  const std::int64_t budget = 65536;  // column elements per tile
  return std::clamp<std::int64_t>(budget / std::max<std::int64_t>(g.k(), 1), 64, std::max<std::int64_t>(g.p(), 1));
}

template <class T>
T dot(const T* a, const T* b, std::int64_t n) {
  constexpr int lanes = 16;
  T acc[lanes] = {};
  std::int64_t i = 0;
  for (; i + lanes <= n; i += lanes)
    for (int j = 0; j < lanes; ++j) acc[j] += a[i + j] * b[i + j];
  T tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  for (int width = lanes / 2; width > 0; width /= 2)
    for (int j = 0; j < width; ++j) acc[j] += acc[j + width];
  return acc[0] + tail;
}

template <class T>
void conv_forward(const ConvGeometry& g, const T* in, const T* weight, const T* bias, T* out) {
  const std::int64_t K = g.k();
  const std::int64_t P = g.p();
  const std::int64_t tile = tile_pixels(g);
  std::vector<T> col(static_cast<std::size_t>(K * tile));
  for (std::int64_t n = 0; n < g.n; ++n) {
    const T* image = in + n * g.c * g.h * g.w;
    T* dst = out + n * g.o * P;
    for (std::int64_t p0 = 0; p0 < P; p0 += tile) {
      const std::int64_t cnt = std::min(tile, P - p0);
      im2col(g, image, p0, cnt, col.data());
      for (std::int64_t o = 0; o < g.o; ++o) {
        const T b = bias ? bias[o] : T(0);
        std::fill(dst + o * P + p0, dst + o * P + p0 + cnt, b);
      }
      std::int64_t o = 0;
      for (; o + 4 <= g.o; o += 4) {
        T* r0 = dst + (o + 0) * P + p0;
        T* r1 = dst + (o + 1) * P + p0;
        T* r2 = dst + (o + 2) * P + p0;
        T* r3 = dst + (o + 3) * P + p0;
        for (std::int64_t k = 0; k < K; ++k) {
          const T w0 = weight[(o + 0) * K + k];
          const T w1 = weight[(o + 1) * K + k];
          const T w2 = weight[(o + 2) * K + k];
          const T w3 = weight[(o + 3) * K + k];
          const T* cr = col.data() + k * cnt;
          for (std::int64_t i = 0; i < cnt; ++i) {
            const T v = cr[i];
            r0[i] += w0 * v;
            r1[i] += w1 * v;
            r2[i] += w2 * v;
            r3[i] += w3 * v;
          }
        }
      }
      for (; o < g.o; ++o) {
        T* r0 = dst + o * P + p0;
        for (std::int64_t k = 0; k < K; ++k) {
          const T w0 = weight[o * K + k];
          const T* cr = col.data() + k * cnt;
          for (std::int64_t i = 0; i < cnt; ++i) r0[i] += w0 * cr[i];
        }
      }
    }
  }
}

template <class T>
void conv_backward(const ConvGeometry& g, const T* in, const T* weight, const T* grad_out,
                   T* grad_in, T* grad_weight, T* grad_bias) {
  const std::int64_t K = g.k();
  const std::int64_t P = g.p();
  const std::int64_t tile = tile_pixels(g);
  std::vector<T> col(static_cast<std::size_t>(K * tile));
  std::vector<T> dcol(grad_in ? static_cast<std::size_t>(K * tile) : 0);
  for (std::int64_t n = 0; n < g.n; ++n) {
    const T* image = in + n * g.c * g.h * g.w;
    const T* go = grad_out + n * g.o * P;
    if (grad_bias) {
      for (std::int64_t o = 0; o < g.o; ++o) {
        T s = 0;
        for (std::int64_t p = 0; p < P; ++p) s += go[o * P + p];
        grad_bias[o] += s;
      }
    }
    for (std::int64_t p0 = 0; p0 < P; p0 += tile) {
      const std::int64_t cnt = std::min(tile, P - p0);
      if (grad_weight) {
        im2col(g, image, p0, cnt, col.data());
        for (std::int64_t o = 0; o < g.o; ++o)
          for (std::int64_t k = 0; k < K; ++k)
            grad_weight[o * K + k] += dot(go + o * P + p0, col.data() + k * cnt, cnt);
      }
      if (grad_in) {
        std::fill(dcol.begin(), dcol.end(), T(0));
        for (std::int64_t k = 0; k < K; ++k) {
          T* dr = dcol.data() + k * cnt;
          for (std::int64_t o = 0; o < g.o; ++o) {
            const T w = weight[o * K + k];
            const T* gr = go + o * P + p0;
            for (std::int64_t i = 0; i < cnt; ++i) dr[i] += w * gr[i];
          }
        }
        col2im_add(g, dcol.data(), p0, cnt, grad_in + n * g.c * g.h * g.w);
      }
    }
  }
}

template <class T>
Buffer zero_like(std::size_t n) {
  return Buffer(dtype_of<T>(), n);
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride, int pad) {
  const ConvGeometry g = conv_geometry(input, weight, bias, stride, pad);
  const Shape out_shape(g.n, g.o, g.oh, g.ow);
  Buffer out(input.dtype(), static_cast<std::size_t>(out_shape.numel()));
  dispatch(input.dtype(), [&]<class T>(TypeTag<T>) {
    conv_forward<T>(g, input.data<T>().data(), weight.data<T>().data(),
                    bias.defined() ? bias.data<T>().data() : nullptr, out.as<T>().data());
  });
  auto in_impl = input.impl();
  auto w_impl = weight.impl();
  auto b_impl = bias.defined() ? bias.impl() : nullptr;
  std::vector<Tensor> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result(out_shape, std::move(out), "conv2d", std::move(inputs),
                     [g, in_impl, w_impl, b_impl](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      Buffer gi, gw, gb;
      if (in_impl->requires_grad) gi = zero_like<T>(in_impl->data.size());
      if (w_impl->requires_grad) gw = zero_like<T>(w_impl->data.size());
      if (b_impl && b_impl->requires_grad) gb = zero_like<T>(b_impl->data.size());
      conv_backward<T>(g, in_impl->data.as<T>().data(), w_impl->data.as<T>().data(),
                       gout.as<T>().data(),
                       in_impl->requires_grad ? gi.as<T>().data() : nullptr,
                       w_impl->requires_grad ? gw.as<T>().data() : nullptr,
                       (b_impl && b_impl->requires_grad) ? gb.as<T>().data() : nullptr);
      if (in_impl->requires_grad) accumulate_grad(*in_impl, gi);
      if (w_impl->requires_grad) accumulate_grad(*w_impl, gw);
      if (b_impl && b_impl->requires_grad) accumulate_grad(*b_impl, gb);
    });
  });
}

Tensor conv2d_reference(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride, int pad) {
  const ConvGeometry g = conv_geometry(input, weight, bias, stride, pad);
  Tensor out(Shape(g.n, g.o, g.oh, g.ow), input.dtype());
  dispatch(input.dtype(), [&]<class T>(TypeTag<T>) {
    auto x = input.data<T>();
    auto w = weight.data<T>();
    auto y = out.mutable_data<T>();
    for (std::int64_t n = 0; n < g.n; ++n)
      for (std::int64_t o = 0; o < g.o; ++o)
        for (std::int64_t oy = 0; oy < g.oh; ++oy)
          for (std::int64_t ox = 0; ox < g.ow; ++ox) {
            T acc = bias.defined() ? bias.data<T>()[o] : T(0);
            for (std::int64_t c = 0; c < g.c; ++c)
              for (std::int64_t ky = 0; ky < g.kh; ++ky)
                for (std::int64_t kx = 0; kx < g.kw; ++kx) {
                  const std::int64_t iy = oy * g.stride - g.pad + ky;
                  const std::int64_t ix = ox * g.stride - g.pad + kx;
                  const bool inside = iy >= 0 && iy < g.h && ix >= 0 && ix < g.w;
                  const T v = inside ? x[((n * g.c + c) * g.h + iy) * g.w + ix] : T(0);
                  acc += w[((o * g.c + c) * g.kh + ky) * g.kw + kx] * v;
                }
            y[((n * g.o + o) * g.oh + oy) * g.ow + ox] = acc;
          }
  });
  return out;
}

Tensor relu(const Tensor& input) {
  Buffer out(input.dtype(), static_cast<std::size_t>(input.numel()));
  dispatch(input.dtype(), [&]<class T>(TypeTag<T>) {
    auto x = input.data<T>();
    auto y = out.as<T>();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    if (auto* trace = BranchTrace::current())
      for (std::size_t i = 0; i < x.size(); ++i) trace->record(x[i] > T(0));
  });
  auto in_impl = input.impl();
  return make_result(input.shape(), std::move(out), "relu", {input}, [in_impl](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      Buffer gi = zero_like<T>(gout.size());
      auto x = in_impl->data.as<T>();
      auto g = gout.as<T>();
      auto d = gi.as<T>();
      for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] > T(0) ? g[i] : T(0);
      accumulate_grad(*in_impl, gi);
    });
  });
}

Tensor sigmoid(const Tensor& input) {
  Buffer out(input.dtype(), static_cast<std::size_t>(input.numel()));
  dispatch(input.dtype(), [&]<class T>(TypeTag<T>) {
    auto x = input.data<T>();
    auto y = out.as<T>();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] >= T(0)) {
        y[i] = T(1) / (T(1) + std::exp(-x[i]));
      } else {
        const T e = std::exp(x[i]);
        y[i] = e / (T(1) + e);
      }
    }
  });
  auto in_impl = input.impl();
  Buffer saved = out;
  return make_result(input.shape(), std::move(out), "sigmoid", {input},
                     [in_impl, saved = std::move(saved)](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      Buffer gi = zero_like<T>(gout.size());
      auto s = saved.as<T>();
      auto g = gout.as<T>();
      auto d = gi.as<T>();
      for (std::size_t i = 0; i < s.size(); ++i) d[i] = g[i] * s[i] * (T(1) - s[i]);
      accumulate_grad(*in_impl, gi);
    });
  });
}

Tensor maxpool2(const Tensor& input) {
  const auto& s = input.shape();
  if (s.h() % 2 != 0 || s.w() % 2 != 0)
    throw GeometryError("maxpool2: height and width must be even, got " + s.str());
  const Shape out_shape(s.n(), s.c(), s.h() / 2, s.w() / 2);
  Buffer out(input.dtype(), static_cast<std::size_t>(out_shape.numel()));
  std::vector<std::int64_t> argmax(static_cast<std::size_t>(out_shape.numel()));
  dispatch(input.dtype(), [&]<class T>(TypeTag<T>) {
    auto x = input.data<T>();
    auto y = out.as<T>();
    const std::int64_t W = s.w();
    auto* trace = BranchTrace::current();
    std::size_t j = 0;
    for (std::int64_t nc = 0; nc < s.n() * s.c(); ++nc) {
      const std::int64_t base = nc * s.plane();
      for (std::int64_t oy = 0; oy < out_shape.h(); ++oy)
        for (std::int64_t ox = 0; ox < out_shape.w(); ++ox, ++j) {
          const std::int64_t top = base + 2 * oy * W + 2 * ox;
          const std::int64_t cand[4] = {top, top + 1, top + W, top + W + 1};
          int best_q = 0;
          for (int q = 1; q < 4; ++q)
            if (x[cand[q]] > x[cand[best_q]]) best_q = q;
          if (trace) trace->record(static_cast<std::uint64_t>(best_q));
          const std::int64_t best = cand[best_q];
          y[j] = x[best];
          argmax[j] = best;
        }
    }
  });
  auto in_impl = input.impl();
  return make_result(out_shape, std::move(out), "maxpool2", {input},
                     [in_impl, argmax = std::move(argmax)](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      Buffer gi = zero_like<T>(in_impl->data.size());
      auto g = gout.as<T>();
      auto d = gi.as<T>();
      for (std::size_t j = 0; j < g.size(); ++j) d[argmax[j]] += g[j];
      accumulate_grad(*in_impl, gi);
    });
  });
}

namespace {

struct Tap {
  std::int64_t i0, i1;
  double w0, w1;
};

// Source taps for doubling an axis of length n with half-pixel centers.
std::vector<Tap> upsample_taps(std::int64_t n) {
  std::vector<Tap> taps(static_cast<std::size_t>(2 * n));
  for (std::int64_t o = 0; o < 2 * n; ++o) {
    double src = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
    if (src < 0.0) src = 0.0;
    const auto i0 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(src)), n - 1);
    const auto i1 = std::min<std::int64_t>(i0 + 1, n - 1);
    const double frac = src - static_cast<double>(i0);
    taps[static_cast<std::size_t>(o)] = {i0, i1, 1.0 - frac, frac};
  }
  return taps;
}

}  // namespace

Tensor upsample2(const Tensor& input) {
  const auto& s = input.shape();
  const Shape out_shape(s.n(), s.c(), 2 * s.h(), 2 * s.w());
  Buffer out(input.dtype(), static_cast<std::size_t>(out_shape.numel()));
  auto ty = upsample_taps(s.h());
  auto tx = upsample_taps(s.w());
  dispatch(input.dtype(), [&]<class T>(TypeTag<T>) {
    auto x = input.data<T>();
    auto y = out.as<T>();
    for (std::int64_t nc = 0; nc < s.n() * s.c(); ++nc) {
      const T* src = x.data() + nc * s.plane();
      T* dst = y.data() + nc * out_shape.plane();
      for (std::int64_t oy = 0; oy < out_shape.h(); ++oy) {
        const Tap& a = ty[static_cast<std::size_t>(oy)];
        const T* r0 = src + a.i0 * s.w();
        const T* r1 = src + a.i1 * s.w();
        for (std::int64_t ox = 0; ox < out_shape.w(); ++ox) {
          const Tap& b = tx[static_cast<std::size_t>(ox)];
          const T top = T(b.w0) * r0[b.i0] + T(b.w1) * r0[b.i1];
          const T bot = T(b.w0) * r1[b.i0] + T(b.w1) * r1[b.i1];
          dst[oy * out_shape.w() + ox] = T(a.w0) * top + T(a.w1) * bot;
        }
      }
    }
  });
  auto in_impl = input.impl();
  return make_result(out_shape, std::move(out), "upsample2", {input},
                     [in_impl, s, out_shape, ty = std::move(ty), tx = std::move(tx)](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      Buffer gi = zero_like<T>(in_impl->data.size());
      auto g = gout.as<T>();
      auto d = gi.as<T>();
      for (std::int64_t nc = 0; nc < s.n() * s.c(); ++nc) {
        const T* src = g.data() + nc * out_shape.plane();
        T* dst = d.data() + nc * s.plane();
        for (std::int64_t oy = 0; oy < out_shape.h(); ++oy) {
          const Tap& a = ty[static_cast<std::size_t>(oy)];
          for (std::int64_t ox = 0; ox < out_shape.w(); ++ox) {
            const Tap& b = tx[static_cast<std::size_t>(ox)];
            const T v = src[oy * out_shape.w() + ox];
            dst[a.i0 * s.w() + b.i0] += T(a.w0 * b.w0) * v;
            dst[a.i0 * s.w() + b.i1] += T(a.w0 * b.w1) * v;
            dst[a.i1 * s.w() + b.i0] += T(a.w1 * b.w0) * v;
            dst[a.i1 * s.w() + b.i1] += T(a.w1 * b.w1) * v;
          }
        }
      }
      accumulate_grad(*in_impl, gi);
    });
  });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  require_same_dtype("concat_channels", a, b);
  if (sa.n() != sb.n() || sa.h() != sb.h() || sa.w() != sb.w())
    throw DimensionError("concat_channels: batch/spatial mismatch " + sa.str() + " vs " + sb.str());
  const Shape out_shape(sa.n(), sa.c() + sb.c(), sa.h(), sa.w());
  Buffer out(a.dtype(), static_cast<std::size_t>(out_shape.numel()));
  const std::int64_t la = sa.c() * sa.plane();
  const std::int64_t lb = sb.c() * sb.plane();
  dispatch(a.dtype(), [&]<class T>(TypeTag<T>) {
    auto xa = a.data<T>();
    auto xb = b.data<T>();
    auto y = out.as<T>();
    for (std::int64_t n = 0; n < sa.n(); ++n) {
      std::copy_n(xa.data() + n * la, la, y.data() + n * (la + lb));
      std::copy_n(xb.data() + n * lb, lb, y.data() + n * (la + lb) + la);
    }
  });
  auto ai = a.impl();
  auto bi = b.impl();
  return make_result(out_shape, std::move(out), "concat_channels", {a, b},
                     [ai, bi, la, lb, batches = sa.n()](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      auto g = gout.as<T>();
      if (ai->requires_grad) {
        Buffer ga = zero_like<T>(ai->data.size());
        for (std::int64_t n = 0; n < batches; ++n)
          std::copy_n(g.data() + n * (la + lb), la, ga.as<T>().data() + n * la);
        accumulate_grad(*ai, ga);
      }
      if (bi->requires_grad) {
        Buffer gb = zero_like<T>(bi->data.size());
        for (std::int64_t n = 0; n < batches; ++n)
          std::copy_n(g.data() + n * (la + lb) + la, lb, gb.as<T>().data() + n * lb);
        accumulate_grad(*bi, gb);
      }
    });
  });
}

Tensor elementwise(ElementwiseKind kind, const Tensor& a, const Tensor& b) {
  const bool unary = kind == ElementwiseKind::square;
  if (!unary) {
    if (!b.defined()) throw ContractError("elementwise: binary kind needs two operands");
    require_same_shape("elementwise", a, b);
  }
  Buffer out(a.dtype(), static_cast<std::size_t>(a.numel()));
  dispatch(a.dtype(), [&]<class T>(TypeTag<T>) {
    auto x = a.data<T>();
    auto y = out.as<T>();
    if (unary) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * x[i];
      return;
    }
    auto z = b.data<T>();
    switch (kind) {
      case ElementwiseKind::add: for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + z[i]; break;
      case ElementwiseKind::sub: for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - z[i]; break;
      case ElementwiseKind::mul: for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * z[i]; break;
      case ElementwiseKind::div: for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / z[i]; break;
      default: break;
    }
  });
  auto ai = a.impl();
  auto bi = unary ? nullptr : b.impl();
  std::vector<Tensor> inputs{a};
  if (!unary) inputs.push_back(b);
  static constexpr const char* names[] = {"add", "sub", "mul", "div", "square"};
  return make_result(a.shape(), std::move(out), names[static_cast<int>(kind)], std::move(inputs),
                     [kind, ai, bi](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      auto g = gout.as<T>();
      auto x = ai->data.as<T>();
      const std::size_t n = g.size();
      if (kind == ElementwiseKind::square) {
        Buffer ga = zero_like<T>(n);
        auto d = ga.as<T>();
        for (std::size_t i = 0; i < n; ++i) d[i] = T(2) * x[i] * g[i];
        accumulate_grad(*ai, ga);
        return;
      }
      auto z = bi->data.as<T>();
      if (ai->requires_grad) {
        Buffer ga = zero_like<T>(n);
        auto d = ga.as<T>();
        for (std::size_t i = 0; i < n; ++i) {
          switch (kind) {
            case ElementwiseKind::add:
            case ElementwiseKind::sub: d[i] = g[i]; break;
            case ElementwiseKind::mul: d[i] = g[i] * z[i]; break;
            case ElementwiseKind::div: d[i] = g[i] / z[i]; break;
            default: break;
          }
        }
        accumulate_grad(*ai, ga);
      }
      if (bi->requires_grad) {
        Buffer gb = zero_like<T>(n);
        auto d = gb.as<T>();
        for (std::size_t i = 0; i < n; ++i) {
          switch (kind) {
            case ElementwiseKind::add: d[i] = g[i]; break;
            case ElementwiseKind::sub: d[i] = -g[i]; break;
            case ElementwiseKind::mul: d[i] = g[i] * x[i]; break;
            case ElementwiseKind::div: d[i] = -g[i] * x[i] / (z[i] * z[i]); break;
            default: break;
          }
        }
        accumulate_grad(*bi, gb);
      }
    });
  });
}

Tensor affine(const Tensor& a, double factor, double offset) {
  Buffer out(a.dtype(), static_cast<std::size_t>(a.numel()));
  dispatch(a.dtype(), [&]<class T>(TypeTag<T>) {
    auto x = a.data<T>();
    auto y = out.as<T>();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * T(factor) + T(offset);
  });
  auto ai = a.impl();
  return make_result(a.shape(), std::move(out), "affine", {a}, [ai, factor](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      Buffer ga = zero_like<T>(gout.size());
      auto g = gout.as<T>();
      auto d = ga.as<T>();
      for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] * T(factor);
      accumulate_grad(*ai, ga);
    });
  });
}

Tensor reduce(ReduceKind kind, const Tensor& input) {
  const std::int64_t count = input.numel();
  Buffer out(input.dtype(), 1);
  dispatch(input.dtype(), [&]<class T>(TypeTag<T>) {
    double acc = 0.0;
    for (T v : input.data<T>()) acc += static_cast<double>(v);
    if (kind == ReduceKind::mean) acc = count > 0 ? acc / static_cast<double>(count) : 0.0;
    out.as<T>()[0] = static_cast<T>(acc);
  });
  auto ai = input.impl();
  return make_result(Shape(1, 1, 1, 1), std::move(out), kind == ReduceKind::sum ? "sum" : "mean",
                     {input}, [ai, kind, count](const Buffer& gout) {
    dispatch(gout.dtype(), [&]<class T>(TypeTag<T>) {
      Buffer ga = zero_like<T>(ai->data.size());
      T v = gout.as<T>()[0];
      if (kind == ReduceKind::mean && count > 0) v = v / static_cast<T>(count);
      auto d = ga.as<T>();
      std::fill(d.begin(), d.end(), v);
      accumulate_grad(*ai, ga);
    });
  });
}

}  // namespace faintedge
