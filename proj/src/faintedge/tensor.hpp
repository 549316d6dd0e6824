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

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "faintedge/error.hpp"

namespace faintedge {

enum class DType { f32, f64 };

const char* to_string(DType dtype);
DType dtype_from_string(const std::string& name);

template <class T>
struct TypeTag {
  using type = T;
};

template <class T>
constexpr DType dtype_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? DType::f32 : DType::f64;
}

// Calls fn(TypeTag<float>{}) or fn(TypeTag<double>{}) for the given dtype.
template <class Fn>
decltype(auto) dispatch(DType dtype, Fn&& fn) {
  if (dtype == DType::f32) return fn(TypeTag<float>{});
  return fn(TypeTag<double>{});
}

// Batch x channels x height x width.
struct Shape {
  std::array<std::int64_t, 4> dims{0, 0, 0, 0};

  Shape() = default;
  Shape(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w)
      : dims{n, c, h, w} {}

  std::int64_t n() const { return dims[0]; }
  std::int64_t c() const { return dims[1]; }
  std::int64_t h() const { return dims[2]; }
  std::int64_t w() const { return dims[3]; }
  std::int64_t numel() const { return dims[0] * dims[1] * dims[2] * dims[3]; }
  std::int64_t plane() const { return dims[2] * dims[3]; }

  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Contiguous scalar storage of one dtype.
class Buffer {
 public:
  Buffer() = default;
  Buffer(DType dtype, std::size_t size);

  DType dtype() const { return std::holds_alternative<std::vector<float>>(store_) ? DType::f32 : DType::f64; }
  std::size_t size() const;

  template <class T>
  std::span<T> as() {
    auto* v = std::get_if<std::vector<T>>(&store_);
    if (v == nullptr) throw DimensionError("dtype mismatch: buffer holds " + std::string(to_string(dtype())));
    return {v->data(), v->size()};
  }
  template <class T>
  std::span<const T> as() const {
    auto* v = std::get_if<std::vector<T>>(&store_);
    if (v == nullptr) throw DimensionError("dtype mismatch: buffer holds " + std::string(to_string(dtype())));
    return {v->data(), v->size()};
  }

  double get(std::size_t i) const;
  void set(std::size_t i, double value);
  void fill(double value);
  // this += other, elementwise.
  void add_from(const Buffer& other);

 private:
  std::variant<std::vector<float>, std::vector<double>> store_;
};

struct TensorImpl;

// Backward closure: receives the upstream gradient of the node's output.
// It accumulates into its inputs through accumulate_grad().
using BackwardFn = std::function<void(const Buffer& grad_output)>;

struct Node {
  std::string op;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  BackwardFn backward;
};

struct TensorImpl {
  Shape shape;
  Buffer data;
  bool requires_grad = false;
  std::optional<Buffer> grad;
  std::shared_ptr<Node> node;
  bool backward_done = false;
};

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, DType dtype);

  static Tensor zeros(Shape shape, DType dtype);
  static Tensor full(Shape shape, double value, DType dtype);
  static Tensor from_values(Shape shape, std::span<const double> values, DType dtype);
  static Tensor from_values(Shape shape, std::initializer_list<double> values, DType dtype);
  static Tensor scalar(double value, DType dtype);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  DType dtype() const { return impl_->data.dtype(); }
  std::int64_t numel() const { return impl_->shape.numel(); }

  const Buffer& buffer() const { return impl_->data; }
  // Mutable storage; only leaves may be written once a graph depends on them.
  Buffer& mutable_buffer() { return impl_->data; }

  template <class T>
  std::span<const T> data() const { return impl_->data.as<T>(); }
  template <class T>
  std::span<T> mutable_data() { return impl_->data.as<T>(); }

  double item() const;
  double at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const;
  std::vector<double> to_vector() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool flag);
  bool is_leaf() const { return impl_->node == nullptr; }

  bool has_grad() const { return impl_->grad.has_value(); }
  const Buffer& grad() const;
  std::vector<double> grad_vector() const;
  void zero_grad();

  // Reverse-mode sweep from this scalar. Rejected a second time.
  void backward();

  // A leaf copy of the values, detached from any graph.
  Tensor detach() const;

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Gradient recording switch for the current thread.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Treats subnormal floats as zero on this thread while alive (x86 MXCSR
// FTZ/DAZ; a no-op elsewhere). Saturated sigmoids otherwise push f32
// training onto the slow subnormal path.
class FlushDenormalsGuard {
 public:
  FlushDenormalsGuard();
  ~FlushDenormalsGuard();
  FlushDenormalsGuard(const FlushDenormalsGuard&) = delete;
  FlushDenormalsGuard& operator=(const FlushDenormalsGuard&) = delete;

 private:
  unsigned previous_ = 0;
};

// While alive, piecewise ops on this thread (relu, maxpool2) fold the branch
// taken for every element into a running hash. Equal hashes for two
// evaluations of the same program mean both stayed on the same linear piece.
class BranchTrace {
 public:
  BranchTrace();
  ~BranchTrace();
  BranchTrace(const BranchTrace&) = delete;
  BranchTrace& operator=(const BranchTrace&) = delete;

  static BranchTrace* current();
  void record(std::uint64_t branch) { hash_ = (hash_ ^ branch) * 0x100000001B3ull; }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
  BranchTrace* previous_;
};

// Adds delta into impl.grad, allocating a zero buffer on first use. No-op when
// the tensor does not require grad.
void accumulate_grad(TensorImpl& impl, const Buffer& delta);

// Builds an op result. When recording is on and any input requires grad, the
// result is attached to a node holding `backward`.
Tensor make_result(Shape shape, Buffer data, std::string op,
                   std::vector<Tensor> inputs, BackwardFn backward);

}  // namespace faintedge
