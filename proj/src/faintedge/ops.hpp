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

#pragma once

#include "faintedge/tensor.hpp"

namespace faintedge {

// 2-D cross-correlation with zero padding. `bias` may be undefined.
// Output extent is (H + 2*pad - kH) / stride + 1 and the division must be exact.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride = 1, int pad = 0);

// Direct seven-loop convolution, forward only. Accumulates in the same order
// as conv2d (bias, then channel, kernel row, kernel column), so the two agree
// bitwise.
Tensor conv2d_reference(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        int stride = 1, int pad = 0);

Tensor relu(const Tensor& input);
Tensor sigmoid(const Tensor& input);

// 2x2 max pooling, stride 2. Ties go to the lowest index inside the block.
Tensor maxpool2(const Tensor& input);

// Bilinear 2x upsampling, half-pixel centers (align_corners = false).
Tensor upsample2(const Tensor& input);

// Channel concatenation, `a` first.
Tensor concat_channels(const Tensor& a, const Tensor& b);

enum class ElementwiseKind { add, sub, mul, div, square };

// Binary kinds need identical shapes; `square` ignores `b`.
Tensor elementwise(ElementwiseKind kind, const Tensor& a, const Tensor& b = Tensor());

inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseKind::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseKind::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseKind::mul, a, b); }
inline Tensor div(const Tensor& a, const Tensor& b) { return elementwise(ElementwiseKind::div, a, b); }
inline Tensor square(const Tensor& a) { return elementwise(ElementwiseKind::square, a); }

// a * factor + offset.
Tensor affine(const Tensor& a, double factor, double offset = 0.0);
inline Tensor scale(const Tensor& a, double factor) { return affine(a, factor, 0.0); }

enum class ReduceKind { sum, mean };

// Full reduction to a 1x1x1x1 tensor.
Tensor reduce(ReduceKind kind, const Tensor& input);
inline Tensor sum(const Tensor& a) { return reduce(ReduceKind::sum, a); }
inline Tensor mean(const Tensor& a) { return reduce(ReduceKind::mean, a); }

}  // namespace faintedge
