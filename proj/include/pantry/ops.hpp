#pragma once

#include "pantry/tensor.hpp"

namespace pantry::ops {

// Differentiable layer operations. Each op validates shapes, computes its
// output, and, when a tape is active and any input needs gradients, records a
// backward closure. Instantiated for float (training) and double
// (verification).

enum class PoolKind { max, average };

/// floor((in + 2*pad - k) / stride) + 1
inline int out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

/// NaN/Inf screening of op outputs; on by default. Toggling off skips the
/// per-op scan, not the loss-level checks in the training loop.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

/// input [N,C,H,W] * weight [F,C,kH,kW] + bias [F], zero padding.
template <class T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& weight, const TensorT<T>& bias,
                  int stride, int padding);

/// Max/average pooling over square windows. Padded positions never
/// contribute: max is taken over in-bounds elements and averages divide by
/// the in-bounds count, so a constant image pools to the same constant.
template <class T>
TensorT<T> pool2d(const TensorT<T>& input, PoolKind kind, int window, int stride, int padding);

/// out[n,k] = sum_d weight[k,d] * input[n,d] + bias[k]
template <class T>
TensorT<T> dense(const TensorT<T>& input, const TensorT<T>& weight, const TensorT<T>& bias);

template <class T>
TensorT<T> relu(const TensorT<T>& x);

/// Row softmax over the last dimension, exponent-shifted by the row max.
template <class T>
TensorT<T> softmax(const TensorT<T>& x);

/// Mean over the batch of -sum_k target * ln(prob), with probabilities
/// clamped to [1e-12, 1] before the log. Rows of `probabilities` must sum to
/// 1 within 1e-6; each row of `one_hot_targets` must be exactly one-hot.
template <class T>
TensorT<T> cross_entropy(const TensorT<T>& probabilities, const TensorT<T>& one_hot_targets);

/// Elementwise sum of two same-shape tensors (residual join).
template <class T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b);

template <class T>
TensorT<T> multiply(const TensorT<T>& a, const TensorT<T>& b);

template <class T>
TensorT<T> scale(const TensorT<T>& x, T factor);

/// Sum of all elements, as a scalar tensor.
template <class T>
TensorT<T> reduce_sum(const TensorT<T>& x);

/// [N, ...] -> [N, prod(...)]
template <class T>
TensorT<T> flatten(const TensorT<T>& x);

/// Reverse pass from a taped scalar; populates grad on every tensor that
/// needs one and clears the tape.
template <class T>
void backward(TensorT<T>& loss);

}  // namespace pantry::ops
