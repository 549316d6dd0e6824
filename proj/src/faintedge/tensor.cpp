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

#include "faintedge/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace faintedge {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension: return "dimension error";
    case ErrorCode::geometry: return "geometry error";
    case ErrorCode::contract: return "contract error";
    case ErrorCode::state: return "state error";
    case ErrorCode::format: return "format error";
    case ErrorCode::compatibility: return "compatibility error";
    case ErrorCode::io: return "io error";
    case ErrorCode::numeric: return "numeric error";
  }
  return "error";
}

const char* to_string(DType dtype) { return dtype == DType::f32 ? "f32" : "f64"; }

DType dtype_from_string(const std::string& name) {
  if (name == "f32") return DType::f32;
  if (name == "f64") return DType::f64;
  throw ContractError("unknown dtype '" + name + "' (expected f32 or f64)");
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[' << dims[0] << ',' << dims[1] << ',' << dims[2] << ',' << dims[3] << ']';
  return os.str();
}

Buffer::Buffer(DType dtype, std::size_t size) {
  if (dtype == DType::f32)
    store_ = std::vector<float>(size, 0.0f);
  else
    store_ = std::vector<double>(size, 0.0);
}

std::size_t Buffer::size() const {
  return std::visit([](const auto& v) { return v.size(); }, store_);
}

double Buffer::get(std::size_t i) const {
  return std::visit([i](const auto& v) { return static_cast<double>(v.at(i)); }, store_);
}

void Buffer::set(std::size_t i, double value) {
  std::visit([&](auto& v) { v.at(i) = static_cast<typename std::decay_t<decltype(v)>::value_type>(value); }, store_);
}

void Buffer::fill(double value) {
  std::visit([&](auto& v) {
    using T = typename std::decay_t<decltype(v)>::value_type;
    std::fill(v.begin(), v.end(), static_cast<T>(value));
  }, store_);
}

void Buffer::add_from(const Buffer& other) {
  if (other.dtype() != dtype() || other.size() != size())
    throw DimensionError("gradient buffer mismatch during accumulation");
  dispatch(dtype(), [&]<class T>(TypeTag<T>) {
    auto dst = as<T>();
    auto src = other.as<T>();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  });
}

namespace {

thread_local bool t_grad_enabled = true;

void check_shape(const Shape& shape) {
  for (auto d : shape.dims)
    if (d < 0) throw DimensionError("negative extent in shape " + shape.str());
}

}  // namespace

bool grad_enabled() { return t_grad_enabled; }

namespace {
thread_local BranchTrace* active_trace = nullptr;
}

BranchTrace::BranchTrace() : previous_(active_trace) { active_trace = this; }
BranchTrace::~BranchTrace() { active_trace = previous_; }
BranchTrace* BranchTrace::current() { return active_trace; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

#if defined(__SSE2__)
FlushDenormalsGuard::FlushDenormalsGuard() : previous_(_mm_getcsr()) { _mm_setcsr(previous_ | 0x8040u); }
FlushDenormalsGuard::~FlushDenormalsGuard() { _mm_setcsr(previous_); }
#else
FlushDenormalsGuard::FlushDenormalsGuard() = default;
FlushDenormalsGuard::~FlushDenormalsGuard() = default;
#endif

Tensor::Tensor(Shape shape, DType dtype) : impl_(std::make_shared<TensorImpl>()) {
  check_shape(shape);
  impl_->shape = shape;
  impl_->data = Buffer(dtype, static_cast<std::size_t>(shape.numel()));
}

Tensor Tensor::zeros(Shape shape, DType dtype) { return Tensor(shape, dtype); }

Tensor Tensor::full(Shape shape, double value, DType dtype) {
  Tensor t(shape, dtype);
  t.impl_->data.fill(value);
  return t;
}

Tensor Tensor::from_values(Shape shape, std::span<const double> values, DType dtype) {
  Tensor t(shape, dtype);
  if (static_cast<std::int64_t>(values.size()) != shape.numel())
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape.str());
  for (std::size_t i = 0; i < values.size(); ++i) t.impl_->data.set(i, values[i]);
  return t;
}

Tensor Tensor::from_values(Shape shape, std::initializer_list<double> values, DType dtype) {
  return from_values(shape, std::span<const double>(values.begin(), values.size()), dtype);
}

Tensor Tensor::scalar(double value, DType dtype) { return full(Shape(1, 1, 1, 1), value, dtype); }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape().str());
  return impl_->data.get(0);
}

double Tensor::at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
  const auto& s = shape();
  return impl_->data.get(static_cast<std::size_t>(((n * s.c() + c) * s.h() + y) * s.w() + x));
}

std::vector<double> Tensor::to_vector() const {
  std::vector<double> out(static_cast<std::size_t>(numel()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = impl_->data.get(i);
  return out;
}

Tensor& Tensor::set_requires_grad(bool flag) {
  if (!is_leaf()) throw StateError("requires_grad can only be set on leaf tensors");
  impl_->requires_grad = flag;
  return *this;
}

const Buffer& Tensor::grad() const {
  if (!impl_->grad) throw StateError("tensor has no gradient");
  return *impl_->grad;
}

std::vector<double> Tensor::grad_vector() const {
  const auto& g = grad();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g.get(i);
  return out;
}

void Tensor::zero_grad() { impl_->grad.reset(); }

Tensor Tensor::detach() const {
  Tensor t(shape(), dtype());
  t.impl_->data = impl_->data;
  return t;
}

void accumulate_grad(TensorImpl& impl, const Buffer& delta) {
  if (!impl.requires_grad) return;
  if (!impl.grad) {
    impl.grad = delta;
    return;
  }
  impl.grad->add_from(delta);
}

Tensor make_result(Shape shape, Buffer data, std::string op,
                   std::vector<Tensor> inputs, BackwardFn backward) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data = std::move(data);
  if (static_cast<std::int64_t>(impl->data.size()) != shape.numel())
    throw DimensionError(op + ": result buffer does not match shape " + shape.str());
  bool needs = false;
  if (t_grad_enabled) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    auto node = std::make_shared<Node>();
    node->op = std::move(op);
    for (auto& in : inputs) node->inputs.push_back(in.impl());
    node->backward = std::move(backward);
    impl->node = std::move(node);
    impl->requires_grad = true;
  }
  return Tensor(std::move(impl));
}

void Tensor::backward() {
  if (numel() != 1)
    throw ContractError("backward requires a scalar loss, got shape " + shape().str());
  if (impl_->backward_done) throw StateError("backward already ran on this loss");
  if (!impl_->requires_grad) throw StateError("loss does not depend on any tensor requiring grad");

  // Iterative post-order DFS; reversed, it is a topological order from the loss.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack;
  stack.emplace_back(impl_.get(), 0);
  visited.insert(impl_.get());
  while (!stack.empty()) {
    auto& [cur, next] = stack.back();
    if (cur->node && next < cur->node->inputs.size()) {
      TensorImpl* child = cur->node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
      continue;
    }
    order.push_back(cur);
    stack.pop_back();
  }

  Buffer seed(dtype(), 1);
  seed.fill(1.0);
  accumulate_grad(*impl_, seed);
  impl_->backward_done = true;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* t = *it;
    if (!t->node) continue;
    if (t->grad) {
      Buffer g = std::move(*t->grad);
      t->grad.reset();
      t->node->backward(g);
    }
  }
}

}  // namespace faintedge
