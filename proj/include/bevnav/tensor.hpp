#pragma once

// Small reverse-mode differentiation engine. Nodes hold dense row-major
// values; feature maps use [H, W, C] layout. Graphs are built per forward
// pass from parameter leaves, so gradients start from zero every time.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

namespace bevnav {

template <typename T>
struct TensorNode {
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode<T>>> parents;
  std::function<void()> backprop;

  size_t size() const { return value.size(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode<T>> node) : node_(std::move(node)) {}

  static Tensor leaf(std::vector<int> shape, std::vector<T> value, bool requires_grad) {
    auto n = std::make_shared<TensorNode<T>>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    size_t expect = 1;
    for (int d : n->shape) expect *= static_cast<size_t>(d);
    if (expect != n->value.size()) {
      throw std::invalid_argument("Tensor::leaf: shape does not match value size");
    }
    return Tensor(std::move(n));
  }

  static Tensor constant(std::vector<int> shape, std::vector<T> value) {
    return leaf(std::move(shape), std::move(value), false);
  }

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false) {
    size_t total = 1;
    for (int d : shape) total *= static_cast<size_t>(d);
    return leaf(std::move(shape), std::vector<T>(total, T(0)), requires_grad);
  }

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  size_t size() const { return node_->value.size(); }
  std::vector<T>& value() { return node_->value; }
  const std::vector<T>& value() const { return node_->value; }
  const std::vector<T>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }

  T item() const {
    if (node_->value.size() != 1) throw std::logic_error("Tensor::item: not a scalar");
    return node_->value[0];
  }

  TensorNode<T>* node() const { return node_.get(); }
  const std::shared_ptr<TensorNode<T>>& ptr() const { return node_; }

  /// Reverse pass from a scalar output. Gradients accumulate into every
  /// reachable node with requires_grad set.
  void backward() const {
    if (!node_ || node_->value.size() != 1) {
      throw std::logic_error("Tensor::backward: output must be a defined scalar");
    }
    std::vector<TensorNode<T>*> order;
    std::unordered_set<TensorNode<T>*> visited;
    std::vector<std::pair<TensorNode<T>*, size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
      auto& [n, idx] = stack.back();
      if (idx < n->parents.size()) {
        TensorNode<T>* p = n->parents[idx++].get();
        if (p->requires_grad && !visited.count(p)) {
          visited.insert(p);
          stack.emplace_back(p, 0);
        }
      } else {
        order.push_back(n);
        stack.pop_back();
      }
    }
    node_->ensure_grad();
    node_->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if ((*it)->backprop) (*it)->backprop();
    }
  }

 private:
  std::shared_ptr<TensorNode<T>> node_;
};

namespace detail {

template <typename T>
std::shared_ptr<TensorNode<T>> new_node(std::vector<int> shape, std::vector<T> value,
                                        std::vector<std::shared_ptr<TensorNode<T>>> parents) {
  auto n = std::make_shared<TensorNode<T>>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) n->ensure_grad();
  return n;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("add: shape mismatch");
  std::vector<T> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  auto n = detail::new_node<T>(a.shape(), std::move(out), {a.ptr(), b.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    auto* pb = b.node();
    n->backprop = [self, pa, pb]() {
      if (pa->requires_grad) {
        for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
      }
      if (pb->requires_grad) {
        for (size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] += self->grad[i];
      }
    };
  }
  return Tensor<T>(n);
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("mul: shape mismatch");
  std::vector<T> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  auto n = detail::new_node<T>(a.shape(), std::move(out), {a.ptr(), b.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    auto* pb = b.node();
    n->backprop = [self, pa, pb]() {
      if (pa->requires_grad) {
        for (size_t i = 0; i < self->grad.size(); ++i) {
          pa->grad[i] += self->grad[i] * pb->value[i];
        }
      }
      if (pb->requires_grad) {
        for (size_t i = 0; i < self->grad.size(); ++i) {
          pb->grad[i] += self->grad[i] * pa->value[i];
        }
      }
    };
  }
  return Tensor<T>(n);
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  std::vector<T> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * s;
  auto n = detail::new_node<T>(a.shape(), std::move(out), {a.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    n->backprop = [self, pa, s]() {
      for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i] * s;
    };
  }
  return Tensor<T>(n);
}

/// s - a, elementwise.
template <typename T>
Tensor<T> rsub_scalar(T s, const Tensor<T>& a) {
  std::vector<T> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = s - a.value()[i];
  auto n = detail::new_node<T>(a.shape(), std::move(out), {a.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    n->backprop = [self, pa]() {
      for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] -= self->grad[i];
    };
  }
  return Tensor<T>(n);
}

template <typename T>
Tensor<T> tanh_t(const Tensor<T>& a) {
  std::vector<T> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a.value()[i]);
  auto n = detail::new_node<T>(a.shape(), std::move(out), {a.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    n->backprop = [self, pa]() {
      for (size_t i = 0; i < self->grad.size(); ++i) {
        const T y = self->value[i];
        pa->grad[i] += self->grad[i] * (T(1) - y * y);
      }
    };
  }
  return Tensor<T>(n);
}

template <typename T>
Tensor<T> sigmoid_t(const Tensor<T>& a) {
  std::vector<T> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const T x = a.value()[i];
    out[i] = x >= T(0) ? T(1) / (T(1) + std::exp(-x))
                       : std::exp(x) / (T(1) + std::exp(x));
  }
  auto n = detail::new_node<T>(a.shape(), std::move(out), {a.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    n->backprop = [self, pa]() {
      for (size_t i = 0; i < self->grad.size(); ++i) {
        const T y = self->value[i];
        pa->grad[i] += self->grad[i] * y * (T(1) - y);
      }
    };
  }
  return Tensor<T>(n);
}

template <typename T>
Tensor<T> softmax1d(const Tensor<T>& a) {
  T mx = a.value()[0];
  for (T v : a.value()) mx = std::max(mx, v);
  std::vector<T> out(a.size());
  T sum = T(0);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(a.value()[i] - mx);
    sum += out[i];
  }
  for (T& v : out) v /= sum;
  auto n = detail::new_node<T>(a.shape(), std::move(out), {a.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    n->backprop = [self, pa]() {
      T dot = T(0);
      for (size_t i = 0; i < self->grad.size(); ++i) dot += self->grad[i] * self->value[i];
      for (size_t i = 0; i < self->grad.size(); ++i) {
        pa->grad[i] += self->value[i] * (self->grad[i] - dot);
      }
    };
  }
  return Tensor<T>(n);
}

// ---------------------------------------------------------------------------
// Reductions and reshapes
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> mean_all(const Tensor<T>& a) {
  T sum = T(0);
  for (T v : a.value()) sum += v;
  const T inv = T(1) / static_cast<T>(a.size());
  auto n = detail::new_node<T>({1}, {sum * inv}, {a.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    n->backprop = [self, pa, inv]() {
      const T g = self->grad[0] * inv;
      for (size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += g;
    };
  }
  return Tensor<T>(n);
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, std::vector<int> shape) {
  size_t total = 1;
  for (int d : shape) total *= static_cast<size_t>(d);
  if (total != a.size()) throw std::invalid_argument("reshape: element count mismatch");
  auto n = detail::new_node<T>(std::move(shape), a.value(), {a.ptr()});
  if (n->requires_grad) {
    auto* self = n.get();
    auto* pa = a.node();
    n->backprop = [self, pa]() {
      for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
    };
  }
  return Tensor<T>(n);
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

/// [m, k] x [k, n] -> [m, n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0]) {
    throw std::invalid_argument("matmul: bad shapes");
  }
  const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<T> out(static_cast<size_t>(m) * n, T(0));
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const T av = a.value()[static_cast<size_t>(i) * k + p];
      const T* brow = &b.value()[static_cast<size_t>(p) * n];
      T* orow = &out[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  auto node = detail::new_node<T>({m, n}, std::move(out), {a.ptr(), b.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* pa = a.node();
    auto* pb = b.node();
    node->backprop = [self, pa, pb, m, k, n]() {
      if (pa->requires_grad) {
        for (int i = 0; i < m; ++i) {
          for (int p = 0; p < k; ++p) {
            T acc = T(0);
            const T* grow = &self->grad[static_cast<size_t>(i) * n];
            const T* brow = &pb->value[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
            pa->grad[static_cast<size_t>(i) * k + p] += acc;
          }
        }
      }
      if (pb->requires_grad) {
        for (int i = 0; i < m; ++i) {
          const T* grow = &self->grad[static_cast<size_t>(i) * n];
          for (int p = 0; p < k; ++p) {
            const T av = pa->value[static_cast<size_t>(i) * k + p];
            T* bgrow = &pb->grad[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) bgrow[j] += av * grow[j];
          }
        }
      }
    };
  }
  return Tensor<T>(node);
}

/// Adds a length-n bias vector to every row of [m, n].
template <typename T>
Tensor<T> add_rowvec(const Tensor<T>& a, const Tensor<T>& bias) {
  if (a.shape().size() != 2 || bias.shape().size() != 1 || a.shape()[1] != bias.shape()[0]) {
    throw std::invalid_argument("add_rowvec: bad shapes");
  }
  const int m = a.shape()[0], n = a.shape()[1];
  std::vector<T> out(a.value());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] += bias.value()[j];
  }
  auto node = detail::new_node<T>(a.shape(), std::move(out), {a.ptr(), bias.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* pa = a.node();
    auto* pb = bias.node();
    node->backprop = [self, pa, pb, m, n]() {
      if (pa->requires_grad) {
        for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
      }
      if (pb->requires_grad) {
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            pb->grad[j] += self->grad[static_cast<size_t>(i) * n + j];
          }
        }
      }
    };
  }
  return Tensor<T>(node);
}

/// x [*, d] viewed as rows times W [d, o] plus bias [o].
template <typename T>
Tensor<T> linear_rows(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const int d = w.shape()[0];
  const int rows = static_cast<int>(x.size()) / d;
  Tensor<T> flat = reshape(x, {rows, d});
  return add_rowvec(matmul(flat, w), b);
}

// ---------------------------------------------------------------------------
// Feature-map ops ([H, W, C] layout)
// ---------------------------------------------------------------------------

/// 2D convolution with zero padding. x [H, W, Ci], w [kh, kw, Ci, Co], b [Co].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                 int pad) {
  const int H = x.shape()[0], W = x.shape()[1], Ci = x.shape()[2];
  const int kh = w.shape()[0], kw = w.shape()[1], Co = w.shape()[3];
  if (w.shape()[2] != Ci || b.shape()[0] != Co) {
    throw std::invalid_argument("conv2d: channel mismatch");
  }
  const int Ho = (H + 2 * pad - kh) / stride + 1;
  const int Wo = (W + 2 * pad - kw) / stride + 1;
  std::vector<T> out(static_cast<size_t>(Ho) * Wo * Co);

  for (int oh = 0; oh < Ho; ++oh) {
    for (int ow = 0; ow < Wo; ++ow) {
      T* orow = &out[(static_cast<size_t>(oh) * Wo + ow) * Co];
      for (int co = 0; co < Co; ++co) orow[co] = b.value()[co];
      for (int dkh = 0; dkh < kh; ++dkh) {
        const int ih = oh * stride - pad + dkh;
        if (ih < 0 || ih >= H) continue;
        for (int dkw = 0; dkw < kw; ++dkw) {
          const int iw = ow * stride - pad + dkw;
          if (iw < 0 || iw >= W) continue;
          const T* xrow = &x.value()[(static_cast<size_t>(ih) * W + iw) * Ci];
          const T* wrow = &w.value()[(static_cast<size_t>(dkh) * kw + dkw) * Ci * Co];
          for (int ci = 0; ci < Ci; ++ci) {
            const T xv = xrow[ci];
            const T* wv = &wrow[static_cast<size_t>(ci) * Co];
            for (int co = 0; co < Co; ++co) orow[co] += xv * wv[co];
          }
        }
      }
    }
  }

  auto node = detail::new_node<T>({Ho, Wo, Co}, std::move(out),
                                  {x.ptr(), w.ptr(), b.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* px = x.node();
    auto* pw = w.node();
    auto* pb = b.node();
    node->backprop = [self, px, pw, pb, H, W, Ci, kh, kw, Co, Ho, Wo, stride, pad]() {
      for (int oh = 0; oh < Ho; ++oh) {
        for (int ow = 0; ow < Wo; ++ow) {
          const T* grow = &self->grad[(static_cast<size_t>(oh) * Wo + ow) * Co];
          if (pb->requires_grad) {
            for (int co = 0; co < Co; ++co) pb->grad[co] += grow[co];
          }
          for (int dkh = 0; dkh < kh; ++dkh) {
            const int ih = oh * stride - pad + dkh;
            if (ih < 0 || ih >= H) continue;
            for (int dkw = 0; dkw < kw; ++dkw) {
              const int iw = ow * stride - pad + dkw;
              if (iw < 0 || iw >= W) continue;
              const size_t xoff = (static_cast<size_t>(ih) * W + iw) * Ci;
              const size_t woff = (static_cast<size_t>(dkh) * kw + dkw) * Ci * Co;
              for (int ci = 0; ci < Ci; ++ci) {
                const T xv = px->value[xoff + ci];
                const T* wv = &pw->value[woff + static_cast<size_t>(ci) * Co];
                T gx = T(0);
                for (int co = 0; co < Co; ++co) {
                  const T g = grow[co];
                  gx += g * wv[co];
                  if (pw->requires_grad) {
                    pw->grad[woff + static_cast<size_t>(ci) * Co + co] += g * xv;
                  }
                }
                if (px->requires_grad) px->grad[xoff + ci] += gx;
              }
            }
          }
        }
      }
    };
  }
  return Tensor<T>(node);
}

/// Transposed convolution with kernel 2, stride 2: [H, W, Ci] -> [2H, 2W, Co].
/// w [2, 2, Ci, Co], b [Co].
template <typename T>
Tensor<T> conv_transpose2x2(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const int H = x.shape()[0], W = x.shape()[1], Ci = x.shape()[2];
  const int Co = w.shape()[3];
  if (w.shape()[0] != 2 || w.shape()[1] != 2 || w.shape()[2] != Ci || b.shape()[0] != Co) {
    throw std::invalid_argument("conv_transpose2x2: bad shapes");
  }
  const int Ho = 2 * H, Wo = 2 * W;
  std::vector<T> out(static_cast<size_t>(Ho) * Wo * Co);
  for (int oh = 0; oh < Ho; ++oh) {
    for (int ow = 0; ow < Wo; ++ow) {
      const T* xrow = &x.value()[(static_cast<size_t>(oh / 2) * W + ow / 2) * Ci];
      const T* wrow = &w.value()[(static_cast<size_t>(oh % 2) * 2 + ow % 2) * Ci * Co];
      T* orow = &out[(static_cast<size_t>(oh) * Wo + ow) * Co];
      for (int co = 0; co < Co; ++co) orow[co] = b.value()[co];
      for (int ci = 0; ci < Ci; ++ci) {
        const T xv = xrow[ci];
        const T* wv = &wrow[static_cast<size_t>(ci) * Co];
        for (int co = 0; co < Co; ++co) orow[co] += xv * wv[co];
      }
    }
  }
  auto node = detail::new_node<T>({Ho, Wo, Co}, std::move(out),
                                  {x.ptr(), w.ptr(), b.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* px = x.node();
    auto* pw = w.node();
    auto* pb = b.node();
    node->backprop = [self, px, pw, pb, H, W, Ci, Co, Ho, Wo]() {
      for (int oh = 0; oh < Ho; ++oh) {
        for (int ow = 0; ow < Wo; ++ow) {
          const T* grow = &self->grad[(static_cast<size_t>(oh) * Wo + ow) * Co];
          const size_t xoff = (static_cast<size_t>(oh / 2) * W + ow / 2) * Ci;
          const size_t woff = (static_cast<size_t>(oh % 2) * 2 + ow % 2) * Ci * Co;
          if (pb->requires_grad) {
            for (int co = 0; co < Co; ++co) pb->grad[co] += grow[co];
          }
          for (int ci = 0; ci < Ci; ++ci) {
            const T xv = px->value[xoff + ci];
            T gx = T(0);
            for (int co = 0; co < Co; ++co) {
              const T g = grow[co];
              gx += g * pw->value[woff + static_cast<size_t>(ci) * Co + co];
              if (pw->requires_grad) {
                pw->grad[woff + static_cast<size_t>(ci) * Co + co] += g * xv;
              }
            }
            if (px->requires_grad) px->grad[xoff + ci] += gx;
          }
        }
      }
    };
  }
  return Tensor<T>(node);
}

/// Channel-wise concatenation of equally sized [H, W, Ck] maps.
template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_channels: empty input");
  const int H = xs[0].shape()[0], W = xs[0].shape()[1];
  int Co = 0;
  for (const auto& x : xs) {
    if (x.shape()[0] != H || x.shape()[1] != W) {
      throw std::invalid_argument("concat_channels: spatial mismatch");
    }
    Co += x.shape()[2];
  }
  std::vector<T> out(static_cast<size_t>(H) * W * Co);
  const size_t cells = static_cast<size_t>(H) * W;
  {
    int off = 0;
    for (const auto& x : xs) {
      const int c = x.shape()[2];
      for (size_t i = 0; i < cells; ++i) {
        for (int ch = 0; ch < c; ++ch) {
          out[i * Co + off + ch] = x.value()[i * c + ch];
        }
      }
      off += c;
    }
  }
  std::vector<std::shared_ptr<TensorNode<T>>> parents;
  for (const auto& x : xs) parents.push_back(x.ptr());
  auto node = detail::new_node<T>({H, W, Co}, std::move(out), std::move(parents));
  if (node->requires_grad) {
    auto* self = node.get();
    std::vector<TensorNode<T>*> ps;
    std::vector<int> chans;
    for (const auto& x : xs) {
      ps.push_back(x.node());
      chans.push_back(x.shape()[2]);
    }
    node->backprop = [self, ps, chans, cells, Co]() {
      int off = 0;
      for (size_t k = 0; k < ps.size(); ++k) {
        const int c = chans[k];
        if (ps[k]->requires_grad) {
          for (size_t i = 0; i < cells; ++i) {
            for (int ch = 0; ch < c; ++ch) {
              ps[k]->grad[i * c + ch] += self->grad[i * Co + off + ch];
            }
          }
        }
        off += c;
      }
    };
  }
  return Tensor<T>(node);
}

/// Concatenation of [Ni, D] matrices along the row dimension.
template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_rows: empty input");
  const int D = xs[0].shape()[1];
  int N = 0;
  for (const auto& x : xs) {
    if (x.shape().size() != 2 || x.shape()[1] != D) {
      throw std::invalid_argument("concat_rows: column mismatch");
    }
    N += x.shape()[0];
  }
  std::vector<T> out;
  out.reserve(static_cast<size_t>(N) * D);
  for (const auto& x : xs) out.insert(out.end(), x.value().begin(), x.value().end());
  std::vector<std::shared_ptr<TensorNode<T>>> parents;
  for (const auto& x : xs) parents.push_back(x.ptr());
  auto node = detail::new_node<T>({N, D}, std::move(out), std::move(parents));
  if (node->requires_grad) {
    auto* self = node.get();
    std::vector<TensorNode<T>*> ps;
    for (const auto& x : xs) ps.push_back(x.node());
    node->backprop = [self, ps]() {
      size_t off = 0;
      for (TensorNode<T>* p : ps) {
        if (p->requires_grad) {
          for (size_t i = 0; i < p->grad.size(); ++i) p->grad[i] += self->grad[off + i];
        }
        off += p->value.size();
      }
    };
  }
  return Tensor<T>(node);
}

/// Broadcast multiply of [H, W, C] by a single-channel gate [H, W, 1].
template <typename T>
Tensor<T> mul_gate(const Tensor<T>& x, const Tensor<T>& g) {
  const int H = x.shape()[0], W = x.shape()[1], C = x.shape()[2];
  if (g.shape()[0] != H || g.shape()[1] != W || g.shape()[2] != 1) {
    throw std::invalid_argument("mul_gate: bad gate shape");
  }
  const size_t cells = static_cast<size_t>(H) * W;
  std::vector<T> out(x.size());
  for (size_t i = 0; i < cells; ++i) {
    const T gv = g.value()[i];
    for (int c = 0; c < C; ++c) out[i * C + c] = x.value()[i * C + c] * gv;
  }
  auto node = detail::new_node<T>(x.shape(), std::move(out), {x.ptr(), g.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* px = x.node();
    auto* pg = g.node();
    node->backprop = [self, px, pg, cells, C]() {
      for (size_t i = 0; i < cells; ++i) {
        const T gv = pg->value[i];
        T gacc = T(0);
        for (int c = 0; c < C; ++c) {
          const T gr = self->grad[i * C + c];
          if (px->requires_grad) px->grad[i * C + c] += gr * gv;
          gacc += gr * px->value[i * C + c];
        }
        if (pg->requires_grad) pg->grad[i] += gacc;
      }
    };
  }
  return Tensor<T>(node);
}

// ---------------------------------------------------------------------------
// Gather / scatter
// ---------------------------------------------------------------------------

/// Mean of the table rows selected by ids. table [V, D] -> [D].
template <typename T>
Tensor<T> embed_mean(const Tensor<T>& table, const std::vector<int>& ids) {
  if (ids.empty()) throw std::invalid_argument("embed_mean: empty id list");
  const int V = table.shape()[0], D = table.shape()[1];
  std::vector<T> out(D, T(0));
  for (int id : ids) {
    if (id < 0 || id >= V) throw std::out_of_range("embed_mean: id out of range");
    for (int d = 0; d < D; ++d) out[d] += table.value()[static_cast<size_t>(id) * D + d];
  }
  const T inv = T(1) / static_cast<T>(ids.size());
  for (T& v : out) v *= inv;
  auto node = detail::new_node<T>({D}, std::move(out), {table.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* pt = table.node();
    auto ids_copy = ids;
    node->backprop = [self, pt, ids_copy, D, inv]() {
      for (int id : ids_copy) {
        for (int d = 0; d < D; ++d) {
          pt->grad[static_cast<size_t>(id) * D + d] += self->grad[d] * inv;
        }
      }
    };
  }
  return Tensor<T>(node);
}

/// Replaces rows of x [N, D] where valid[i] == 0 with the replacement vector.
template <typename T>
Tensor<T> mask_rows_replace(const Tensor<T>& x, const std::vector<uint8_t>& valid,
                            const Tensor<T>& replacement) {
  const int N = x.shape()[0], D = x.shape()[1];
  if (static_cast<int>(valid.size()) != N || replacement.shape()[0] != D) {
    throw std::invalid_argument("mask_rows_replace: bad shapes");
  }
  std::vector<T> out(x.value());
  for (int i = 0; i < N; ++i) {
    if (!valid[i]) {
      for (int d = 0; d < D; ++d) out[static_cast<size_t>(i) * D + d] = replacement.value()[d];
    }
  }
  auto node = detail::new_node<T>(x.shape(), std::move(out), {x.ptr(), replacement.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* px = x.node();
    auto* pr = replacement.node();
    auto valid_copy = valid;
    node->backprop = [self, px, pr, valid_copy, N, D]() {
      for (int i = 0; i < N; ++i) {
        if (valid_copy[i]) {
          if (px->requires_grad) {
            for (int d = 0; d < D; ++d) {
              px->grad[static_cast<size_t>(i) * D + d] +=
                  self->grad[static_cast<size_t>(i) * D + d];
            }
          }
        } else if (pr->requires_grad) {
          for (int d = 0; d < D; ++d) {
            pr->grad[d] += self->grad[static_cast<size_t>(i) * D + d];
          }
        }
      }
    };
  }
  return Tensor<T>(node);
}

/// Scatter-mean pooling of token features onto grid cells. Each pair maps a
/// token row to a cell; a token may appear in many pairs (one per pixel).
/// tokens [N, D] -> [H, W, D]; counts[cell] is the number of pairs per cell.
template <typename T>
Tensor<T> scatter_mean_pool(const Tensor<T>& tokens,
                            const std::vector<std::pair<int, int>>& pairs,
                            const std::vector<float>& counts, int H, int W) {
  const int N = tokens.shape()[0], D = tokens.shape()[1];
  const size_t cells = static_cast<size_t>(H) * W;
  if (counts.size() != cells) throw std::invalid_argument("scatter_mean_pool: bad counts");
  std::vector<T> out(cells * D, T(0));
  for (const auto& [tok, cell] : pairs) {
    if (tok < 0 || tok >= N || cell < 0 || cell >= static_cast<int>(cells)) {
      throw std::out_of_range("scatter_mean_pool: index out of range");
    }
    const T* trow = &tokens.value()[static_cast<size_t>(tok) * D];
    T* orow = &out[static_cast<size_t>(cell) * D];
    for (int d = 0; d < D; ++d) orow[d] += trow[d];
  }
  for (size_t i = 0; i < cells; ++i) {
    if (counts[i] > 0.0f) {
      const T inv = T(1) / static_cast<T>(counts[i]);
      for (int d = 0; d < D; ++d) out[i * D + d] *= inv;
    }
  }
  auto node = detail::new_node<T>({H, W, D}, std::move(out), {tokens.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* pt = tokens.node();
    auto pairs_copy = pairs;
    auto counts_copy = counts;
    node->backprop = [self, pt, pairs_copy, counts_copy, D]() {
      for (const auto& [tok, cell] : pairs_copy) {
        const T inv = T(1) / static_cast<T>(counts_copy[cell]);
        const T* grow = &self->grad[static_cast<size_t>(cell) * D];
        T* trow = &pt->grad[static_cast<size_t>(tok) * D];
        for (int d = 0; d < D; ++d) trow[d] += grow[d] * inv;
      }
    };
  }
  return Tensor<T>(node);
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Mean binary cross-entropy with logits over all cells, with an optional
/// weight on positive terms. The gradient at each logit is
/// ((w*y + 1 - y) * sigmoid(l) - w*y) / N, the closed form of the stable
/// log-sum-exp formulation.
template <typename T>
Tensor<T> bce_with_logits_mean(const Tensor<T>& logits, const std::vector<float>& targets,
                               T pos_weight = T(1)) {
  if (targets.size() != logits.size()) {
    throw std::invalid_argument("bce_with_logits_mean: target size mismatch");
  }
  auto softplus = [](T x) {
    return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  };
  T sum = T(0);
  for (size_t i = 0; i < targets.size(); ++i) {
    const T l = logits.value()[i];
    const T y = static_cast<T>(targets[i]);
    sum += pos_weight * y * softplus(-l) + (T(1) - y) * softplus(l);
  }
  const T inv = T(1) / static_cast<T>(targets.size());
  auto node = detail::new_node<T>({1}, {sum * inv}, {logits.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* pl = logits.node();
    auto targets_copy = targets;
    node->backprop = [self, pl, targets_copy, pos_weight, inv]() {
      const T g = self->grad[0] * inv;
      for (size_t i = 0; i < targets_copy.size(); ++i) {
        const T l = pl->value[i];
        const T s = l >= T(0) ? T(1) / (T(1) + std::exp(-l))
                              : std::exp(l) / (T(1) + std::exp(l));
        const T y = static_cast<T>(targets_copy[i]);
        pl->grad[i] += g * ((pos_weight * y + T(1) - y) * s - pos_weight * y);
      }
    };
  }
  return Tensor<T>(node);
}

/// Cross-entropy of a single label against a logit vector [K].
template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, int label) {
  const int K = static_cast<int>(logits.size());
  if (label < 0 || label >= K) throw std::out_of_range("softmax_cross_entropy: bad label");
  T mx = logits.value()[0];
  for (T v : logits.value()) mx = std::max(mx, v);
  T sum = T(0);
  for (T v : logits.value()) sum += std::exp(v - mx);
  const T logz = mx + std::log(sum);
  auto node = detail::new_node<T>({1}, {logz - logits.value()[label]}, {logits.ptr()});
  if (node->requires_grad) {
    auto* self = node.get();
    auto* pl = logits.node();
    node->backprop = [self, pl, label, logz]() {
      const T g = self->grad[0];
      for (size_t i = 0; i < pl->value.size(); ++i) {
        const T p = std::exp(pl->value[i] - logz);
        pl->grad[i] += g * (p - (static_cast<int>(i) == label ? T(1) : T(0)));
      }
    };
  }
  return Tensor<T>(node);
}

}  // namespace bevnav
