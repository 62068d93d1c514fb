#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pantry/errors.hpp"

namespace pantry {

/// Dimension list. Layout order is (batch, channel, height, width) for 4-D
/// activations and (batch, feature) for 2-D ones.
using Shape = std::vector<int>;

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d <= 0) throw ArgumentError("shape has non-positive dimension " + shape_str(s));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

template <class T>
class TapeT;

/// N-dimensional numeric array with optional gradient storage. Copying a
/// TensorT copies the handle, not the buffer; two copies see the same data
/// and gradient. requires_grad marks leaf tensors (parameters) whose
/// gradients the backward pass must populate.
template <class T>
class TensorT {
 public:
  using value_type = T;

  TensorT() = default;

  static TensorT zeros(Shape shape, bool requires_grad = false) {
    std::size_t n = shape_numel(shape);
    return TensorT(std::make_shared<Impl>(Impl{std::move(shape), std::vector<T>(n), {},
                                               requires_grad, requires_grad}));
  }

  static TensorT full(Shape shape, T value, bool requires_grad = false) {
    std::size_t n = shape_numel(shape);
    return TensorT(std::make_shared<Impl>(Impl{std::move(shape), std::vector<T>(n, value), {},
                                               requires_grad, requires_grad}));
  }

  static TensorT from_data(Shape shape, std::vector<T> data, bool requires_grad = false) {
    if (shape_numel(shape) != data.size()) {
      throw ArgumentError("tensor data size " + std::to_string(data.size()) +
                          " does not match shape " + shape_str(shape));
    }
    return TensorT(std::make_shared<Impl>(Impl{std::move(shape), std::move(data), {},
                                               requires_grad, requires_grad}));
  }

  static TensorT scalar(T value) { return from_data({1}, {value}); }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int dim(std::size_t i) const { return impl_->shape.at(i); }
  std::size_t ndim() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->data.size(); }

  T* data() { return impl_->data.data(); }
  const T* data() const { return impl_->data.data(); }
  std::vector<T>& values() { return impl_->data; }
  const std::vector<T>& values() const { return impl_->data; }

  T item() const {
    if (numel() != 1) throw ArgumentError("item() on non-scalar tensor " + shape_str(shape()));
    return impl_->data[0];
  }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool v) {
    impl_->requires_grad = v;
    impl_->needs_grad = v || impl_->tape != nullptr;
  }

  /// True for leaves with requires_grad and for outputs of recorded ops.
  bool needs_grad() const { return defined() && impl_->needs_grad; }

  bool has_grad() const { return !impl_->grad.empty(); }
  T* grad() { return impl_->grad.data(); }
  const T* grad() const { return impl_->grad.data(); }
  std::vector<T>& grad_values() { return impl_->grad; }
  const std::vector<T>& grad_values() const { return impl_->grad; }

  /// Allocate (zero-filled) gradient storage if absent.
  void ensure_grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), T(0));
  }
  void zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
  }
  void drop_grad() { impl_->grad.clear(); }

  /// Deep copy of values (no tape state, no grad).
  TensorT clone() const { return from_data(shape(), values(), requires_grad()); }

  /// Stable identity of the underlying buffer.
  const void* id() const { return impl_.get(); }

  /// Tape that produced this tensor, if any (may be stale; Tape::holds
  /// re-validates).
  TapeT<T>* producing_tape() const { return impl_ ? impl_->tape : nullptr; }

  bool finite() const {
    for (T v : impl_->data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

 private:
  friend class TapeT<T>;

  struct Impl {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
    bool needs_grad = false;
    TapeT<T>* tape = nullptr;
    std::uint64_t tape_epoch = 0;
  };

  explicit TensorT(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Impl> impl_;
};

/// Reverse-mode tape. Forward ops append one record each while a Scope is
/// active on the current thread; backward() replays the records in exact
/// reverse order, then clears them. One tape has one writer: a model being
/// trained owns its tape and runs forward/backward on a single thread.
template <class T>
class TapeT {
 public:
  TapeT() = default;
  TapeT(const TapeT&) = delete;
  TapeT& operator=(const TapeT&) = delete;

  /// Makes this tape the recording target for the current thread.
  class Scope {
   public:
    explicit Scope(TapeT& tape) : prev_(active_) { active_ = &tape; }
    ~Scope() { active_ = prev_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    TapeT* prev_;
  };

  static TapeT* active() { return active_; }

  /// Registers op output and its backward closure. The closure must add the
  /// op's contribution into each input's grad buffer.
  void record(const char* op, TensorT<T>& output, std::function<void()> backward_fn) {
    output.impl_->tape = this;
    output.impl_->tape_epoch = epoch_;
    output.impl_->needs_grad = true;
    nodes_.push_back(Node{op, std::move(backward_fn)});
  }

  bool holds(const TensorT<T>& t) const {
    return t.defined() && t.impl_->tape == this && t.impl_->tape_epoch == epoch_;
  }

  std::size_t size() const { return nodes_.size(); }

  void clear() {
    nodes_.clear();
    ++epoch_;
  }

  /// Seeds d(loss)/d(loss) = 1, replays records newest-first, clears the tape.
  void backward(TensorT<T>& loss) {
    if (!holds(loss)) {
      throw StateError("backward: value was not produced on this tape");
    }
    if (loss.numel() != 1) {
      throw ArgumentError("backward: loss must be scalar, got " + shape_str(loss.shape()));
    }
    loss.ensure_grad();
    loss.grad()[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->fn();
    clear();
  }

 private:
  struct Node {
    const char* op;
    std::function<void()> fn;
  };

  std::vector<Node> nodes_;
  std::uint64_t epoch_ = 1;

  inline static thread_local TapeT* active_ = nullptr;
};

using Tensor = TensorT<float>;
using Tape = TapeT<float>;

}  // namespace pantry
