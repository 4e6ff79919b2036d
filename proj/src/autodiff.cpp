// Copyright 2026 AQA Workbench contributors
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

#include "aqa/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace aqa::ad {

std::string Shape::str() const {
  std::string s = "[";
  for (int i = 0; i < rank; ++i) {
    if (i) s += ",";
    s += std::to_string(d[static_cast<std::size_t>(i)]);
  }
  return s + "]";
}

namespace {

// C[M,N] += A[M,K] * B[K,N]; every output row is owned by one thread, so the
// accumulation order per element is fixed regardless of thread count.
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (m > 4)
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * n;
    const T* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[M,N] += A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (m > 4)
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<std::size_t>(j) * k;
      T acc = 0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// C[M,N] += A[K,M]^T * B[K,N]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (m > 4)
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const T av = a[static_cast<std::size_t>(p) * m + i];
      const T* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
VarPtr<T> new_node(const Shape& shape, std::vector<VarPtr<T>> parents) {
  auto v = std::make_shared<Var<T>>();
  v->shape = shape;
  v->val.assign(static_cast<std::size_t>(shape.numel()), T(0));
  v->grad.assign(static_cast<std::size_t>(shape.numel()), T(0));
  for (const auto& p : parents) {
    if (p && p->requires_grad) v->requires_grad = true;
  }
  v->parents = std::move(parents);
  return v;
}

template <typename T>
void require_rank(const VarPtr<T>& x, int rank, const char* who) {
  if (x->shape.rank != rank) {
    throw_data(std::string(who) + ": expected rank " + std::to_string(rank) +
               ", got shape " + x->shape.str());
  }
}

struct ConvGeometry {
  int out_h, out_w, pad_top, pad_left;
};

ConvGeometry conv_geometry(int h, int w, int kh, int kw, const Conv2dSpec& s) {
  ConvGeometry g{};
  if (s.padding == Padding::kSame) {
    g.out_h = (h + s.stride_h - 1) / s.stride_h;
    g.out_w = (w + s.stride_w - 1) / s.stride_w;
    const int pad_h = std::max((g.out_h - 1) * s.stride_h + kh - h, 0);
    const int pad_w = std::max((g.out_w - 1) * s.stride_w + kw - w, 0);
    g.pad_top = pad_h / 2;  // extra padding lands bottom/right
    g.pad_left = pad_w / 2;
  } else {
    if (h < kh || w < kw) throw_data("conv2d: kernel larger than input (valid)");
    g.out_h = (h - kh) / s.stride_h + 1;
    g.out_w = (w - kw) / s.stride_w + 1;
    g.pad_top = 0;
    g.pad_left = 0;
  }
  return g;
}

// col is [C*KH*KW, OH*OW].
template <typename T>
void im2col(const T* x, int c, int h, int w, int kh, int kw,
            const Conv2dSpec& s, const ConvGeometry& g, T* col) {
  const int ohw = g.out_h * g.out_w;
  for (int ch = 0; ch < c; ++ch) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        T* crow = col + (static_cast<std::size_t>(ch) * kh * kw +
                         static_cast<std::size_t>(ki) * kw + kj) * ohw;
        for (int oi = 0; oi < g.out_h; ++oi) {
          const int ii = oi * s.stride_h - g.pad_top + ki;
          for (int oj = 0; oj < g.out_w; ++oj) {
            const int jj = oj * s.stride_w - g.pad_left + kj;
            const bool inside = ii >= 0 && ii < h && jj >= 0 && jj < w;
            crow[oi * g.out_w + oj] =
                inside ? x[(static_cast<std::size_t>(ch) * h + ii) * w + jj] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_acc(const T* col, int c, int h, int w, int kh, int kw,
                const Conv2dSpec& s, const ConvGeometry& g, T* dx) {
  const int ohw = g.out_h * g.out_w;
  for (int ch = 0; ch < c; ++ch) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const T* crow = col + (static_cast<std::size_t>(ch) * kh * kw +
                               static_cast<std::size_t>(ki) * kw + kj) * ohw;
        for (int oi = 0; oi < g.out_h; ++oi) {
          const int ii = oi * s.stride_h - g.pad_top + ki;
          if (ii < 0 || ii >= h) continue;
          for (int oj = 0; oj < g.out_w; ++oj) {
            const int jj = oj * s.stride_w - g.pad_left + kj;
            if (jj < 0 || jj >= w) continue;
            dx[(static_cast<std::size_t>(ch) * h + ii) * w + jj] +=
                crow[oi * g.out_w + oj];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
VarPtr<T> make_var(const Shape& shape, bool requires_grad) {
  auto v = std::make_shared<Var<T>>();
  v->shape = shape;
  v->val.assign(static_cast<std::size_t>(shape.numel()), T(0));
  v->grad.assign(static_cast<std::size_t>(shape.numel()), T(0));
  v->requires_grad = requires_grad;
  return v;
}

template <typename T>
VarPtr<T> make_const(const Shape& shape, std::vector<T> values) {
  if (static_cast<int>(values.size()) != shape.numel()) {
    throw_data("make_const: value count does not match shape " + shape.str());
  }
  auto v = make_var<T>(shape, false);
  v->val = std::move(values);
  return v;
}

template <typename T>
void backward(const VarPtr<T>& root) {
  if (root->shape.numel() != 1) throw_data("backward: root must be a scalar");
  // Iterative postorder topological sort.
  std::vector<Var<T>*> order;
  std::unordered_set<Var<T>*> seen;
  std::vector<std::pair<Var<T>*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Var<T>* parent = node->parents[next].get();
      ++next;
      if (parent != nullptr && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Var<T>* node = *it;
    if (node->backward_fn && node->requires_grad) node->backward_fn(*node);
  }
}

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

template <typename T>
VarPtr<T> add(const VarPtr<T>& a, const VarPtr<T>& b) {
  if (!(a->shape == b->shape)) {
    throw_data("add: shape mismatch " + a->shape.str() + " vs " + b->shape.str());
  }
  auto out = new_node<T>(a->shape, {a, b});
  for (std::size_t i = 0; i < out->val.size(); ++i) {
    out->val[i] = a->val[i] + b->val[i];
  }
  out->backward_fn = [a, b](Var<T>& o) {
    if (a->requires_grad) {
      for (std::size_t i = 0; i < o.grad.size(); ++i) a->grad[i] += o.grad[i];
    }
    if (b->requires_grad) {
      for (std::size_t i = 0; i < o.grad.size(); ++i) b->grad[i] += o.grad[i];
    }
  };
  return out;
}

template <typename T>
VarPtr<T> mul(const VarPtr<T>& a, const VarPtr<T>& b) {
  if (!(a->shape == b->shape)) {
    throw_data("mul: shape mismatch " + a->shape.str() + " vs " + b->shape.str());
  }
  auto out = new_node<T>(a->shape, {a, b});
  for (std::size_t i = 0; i < out->val.size(); ++i) {
    out->val[i] = a->val[i] * b->val[i];
  }
  out->backward_fn = [a, b](Var<T>& o) {
    if (a->requires_grad) {
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        a->grad[i] += o.grad[i] * b->val[i];
      }
    }
    if (b->requires_grad) {
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        b->grad[i] += o.grad[i] * a->val[i];
      }
    }
  };
  return out;
}

template <typename T>
VarPtr<T> affine_const(const VarPtr<T>& x, T a, T b) {
  auto out = new_node<T>(x->shape, {x});
  for (std::size_t i = 0; i < out->val.size(); ++i) out->val[i] = a * x->val[i] + b;
  out->backward_fn = [x, a](Var<T>& o) {
    if (!x->requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) x->grad[i] += a * o.grad[i];
  };
  return out;
}

template <typename T>
VarPtr<T> relu(const VarPtr<T>& x) {
  auto out = new_node<T>(x->shape, {x});
  for (std::size_t i = 0; i < out->val.size(); ++i) {
    out->val[i] = x->val[i] > T(0) ? x->val[i] : T(0);
  }
  out->backward_fn = [x](Var<T>& o) {
    if (!x->requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      if (x->val[i] > T(0)) x->grad[i] += o.grad[i];
    }
  };
  return out;
}

template <typename T>
VarPtr<T> sigmoid(const VarPtr<T>& x) {
  auto out = new_node<T>(x->shape, {x});
  for (std::size_t i = 0; i < out->val.size(); ++i) {
    out->val[i] = T(1) / (T(1) + std::exp(-x->val[i]));
  }
  out->backward_fn = [x](Var<T>& o) {
    if (!x->requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      const T s = o.val[i];
      x->grad[i] += o.grad[i] * s * (T(1) - s);
    }
  };
  return out;
}

template <typename T>
VarPtr<T> tanh_act(const VarPtr<T>& x) {
  auto out = new_node<T>(x->shape, {x});
  for (std::size_t i = 0; i < out->val.size(); ++i) out->val[i] = std::tanh(x->val[i]);
  out->backward_fn = [x](Var<T>& o) {
    if (!x->requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      x->grad[i] += o.grad[i] * (T(1) - o.val[i] * o.val[i]);
    }
  };
  return out;
}

template <typename T>
VarPtr<T> dropout(const VarPtr<T>& x, double p, bool training, Pcg32& rng) {
  if (p < 0.0 || p >= 1.0) throw_data("dropout: p must be in [0, 1)");
  if (!training || p == 0.0) return x;
  auto out = new_node<T>(x->shape, {x});
  auto mask = std::make_shared<std::vector<T>>(x->val.size());
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < x->val.size(); ++i) {
    (*mask)[i] = rng.uniform() >= p ? scale : T(0);
    out->val[i] = x->val[i] * (*mask)[i];
  }
  out->backward_fn = [x, mask](Var<T>& o) {
    if (!x->requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      x->grad[i] += o.grad[i] * (*mask)[i];
    }
  };
  return out;
}

template <typename T>
VarPtr<T> sum_all(const VarPtr<T>& x) {
  auto out = new_node<T>(Shape::of({1}), {x});
  double acc = 0;
  for (const T v : x->val) acc += v;
  out->val[0] = static_cast<T>(acc);
  out->backward_fn = [x](Var<T>& o) {
    if (!x->requires_grad) return;
    const T g = o.grad[0];
    for (auto& gv : x->grad) gv += g;
  };
  return out;
}

// ---------------------------------------------------------------------------
// Linear / embedding / slicing
// ---------------------------------------------------------------------------

template <typename T>
VarPtr<T> linear(const VarPtr<T>& x, const VarPtr<T>& w, const VarPtr<T>& b) {
  require_rank(x, 2, "linear(x)");
  require_rank(w, 2, "linear(w)");
  const int n = x->shape.d[0], in = x->shape.d[1];
  const int out_dim = w->shape.d[0];
  if (w->shape.d[1] != in) {
    throw_data("linear: weight shape " + w->shape.str() + " does not accept " +
               x->shape.str());
  }
  if (b && (b->shape.rank != 1 || b->shape.d[0] != out_dim)) {
    throw_data("linear: bias shape mismatch");
  }
  auto out = new_node<T>(Shape::of({n, out_dim}), b ? std::vector<VarPtr<T>>{x, w, b}
                                                    : std::vector<VarPtr<T>>{x, w});
  gemm_nt(x->val.data(), w->val.data(), out->val.data(), n, in, out_dim);
  if (b) {
    for (int i = 0; i < n; ++i) {
      for (int o = 0; o < out_dim; ++o) {
        out->val[static_cast<std::size_t>(i) * out_dim + o] += b->val[static_cast<std::size_t>(o)];
      }
    }
  }
  out->backward_fn = [x, w, b, n, in, out_dim](Var<T>& o) {
    if (x->requires_grad) {
      gemm_nn(o.grad.data(), w->val.data(), x->grad.data(), n, out_dim, in);
    }
    if (w->requires_grad) {
      gemm_tn(o.grad.data(), x->val.data(), w->grad.data(), out_dim, n, in);
    }
    if (b && b->requires_grad) {
      for (int i = 0; i < n; ++i) {
        for (int od = 0; od < out_dim; ++od) {
          b->grad[static_cast<std::size_t>(od)] +=
              o.grad[static_cast<std::size_t>(i) * out_dim + od];
        }
      }
    }
  };
  return out;
}

template <typename T>
VarPtr<T> embedding_lookup(const std::vector<int>& ids, int n, int t,
                           const VarPtr<T>& table) {
  require_rank(table, 2, "embedding_lookup(table)");
  if (static_cast<int>(ids.size()) != n * t) {
    throw_data("embedding_lookup: id count != n*t");
  }
  const int vocab = table->shape.d[0], e = table->shape.d[1];
  for (int id : ids) {
    if (id < 0 || id >= vocab) throw_data("embedding_lookup: id out of range");
  }
  auto out = new_node<T>(Shape::of({n, t, e}), {table});
  for (int i = 0; i < n * t; ++i) {
    const T* src = table->val.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]) * e;
    std::copy(src, src + e, out->val.data() + static_cast<std::size_t>(i) * e);
  }
  auto ids_copy = std::make_shared<std::vector<int>>(ids);
  out->backward_fn = [table, ids_copy, e](Var<T>& o) {
    if (!table->requires_grad) return;
    for (std::size_t i = 0; i < ids_copy->size(); ++i) {
      T* dst = table->grad.data() + static_cast<std::size_t>((*ids_copy)[i]) * e;
      const T* src = o.grad.data() + i * static_cast<std::size_t>(e);
      for (int j = 0; j < e; ++j) dst[j] += src[j];
    }
  };
  return out;
}

template <typename T>
VarPtr<T> slice_cols(const VarPtr<T>& x, int start, int len) {
  require_rank(x, 2, "slice_cols");
  const int n = x->shape.d[0], f = x->shape.d[1];
  if (start < 0 || start + len > f) throw_data("slice_cols: range out of bounds");
  auto out = new_node<T>(Shape::of({n, len}), {x});
  for (int i = 0; i < n; ++i) {
    std::copy(x->val.data() + static_cast<std::size_t>(i) * f + start,
              x->val.data() + static_cast<std::size_t>(i) * f + start + len,
              out->val.data() + static_cast<std::size_t>(i) * len);
  }
  out->backward_fn = [x, start, len, f, n](Var<T>& o) {
    if (!x->requires_grad) return;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < len; ++j) {
        x->grad[static_cast<std::size_t>(i) * f + start + j] +=
            o.grad[static_cast<std::size_t>(i) * len + j];
      }
    }
  };
  return out;
}

template <typename T>
VarPtr<T> slice_time(const VarPtr<T>& x, int t) {
  require_rank(x, 3, "slice_time");
  const int n = x->shape.d[0], steps = x->shape.d[1], e = x->shape.d[2];
  if (t < 0 || t >= steps) throw_data("slice_time: step out of range");
  auto out = new_node<T>(Shape::of({n, e}), {x});
  for (int i = 0; i < n; ++i) {
    const std::size_t src = (static_cast<std::size_t>(i) * steps + t) * e;
    std::copy(x->val.data() + src, x->val.data() + src + e,
              out->val.data() + static_cast<std::size_t>(i) * e);
  }
  out->backward_fn = [x, t, steps, e, n](Var<T>& o) {
    if (!x->requires_grad) return;
    for (int i = 0; i < n; ++i) {
      const std::size_t dst = (static_cast<std::size_t>(i) * steps + t) * e;
      for (int j = 0; j < e; ++j) {
        x->grad[dst + j] += o.grad[static_cast<std::size_t>(i) * e + j];
      }
    }
  };
  return out;
}

template <typename T>
VarPtr<T> masked_update(const VarPtr<T>& h_new, const VarPtr<T>& h_prev,
                        const std::vector<T>& row_mask) {
  if (!(h_new->shape == h_prev->shape)) throw_data("masked_update: shape mismatch");
  require_rank(h_new, 2, "masked_update");
  const int n = h_new->shape.d[0], g = h_new->shape.d[1];
  if (static_cast<int>(row_mask.size()) != n) {
    throw_data("masked_update: mask length != rows");
  }
  auto out = new_node<T>(h_new->shape, {h_new, h_prev});
  auto mask = std::make_shared<std::vector<T>>(row_mask);
  for (int i = 0; i < n; ++i) {
    const T m = (*mask)[static_cast<std::size_t>(i)];
    for (int j = 0; j < g; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * g + j;
      out->val[idx] = m * h_new->val[idx] + (T(1) - m) * h_prev->val[idx];
    }
  }
  out->backward_fn = [h_new, h_prev, mask, n, g](Var<T>& o) {
    for (int i = 0; i < n; ++i) {
      const T m = (*mask)[static_cast<std::size_t>(i)];
      for (int j = 0; j < g; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * g + j;
        if (h_new->requires_grad) h_new->grad[idx] += m * o.grad[idx];
        if (h_prev->requires_grad) h_prev->grad[idx] += (T(1) - m) * o.grad[idx];
      }
    }
  };
  return out;
}

// ---------------------------------------------------------------------------
// Spatial ops
// ---------------------------------------------------------------------------

template <typename T>
VarPtr<T> conv2d(const VarPtr<T>& x, const VarPtr<T>& w, const VarPtr<T>& b,
                 const Conv2dSpec& spec) {
  require_rank(x, 4, "conv2d(x)");
  require_rank(w, 4, "conv2d(w)");
  const int n = x->shape.d[0], c = x->shape.d[1], h = x->shape.d[2], wd = x->shape.d[3];
  const int oc = w->shape.d[0], kh = w->shape.d[2], kw = w->shape.d[3];
  if (w->shape.d[1] != c) {
    throw_data("conv2d: channel mismatch, input " + x->shape.str() +
               " vs weight " + w->shape.str());
  }
  if (b && (b->shape.rank != 1 || b->shape.d[0] != oc)) {
    throw_data("conv2d: bias shape mismatch");
  }
  const ConvGeometry g = conv_geometry(h, wd, kh, kw, spec);
  const int ohw = g.out_h * g.out_w;
  const int ckk = c * kh * kw;

  auto out = new_node<T>(Shape::of({n, oc, g.out_h, g.out_w}),
                         b ? std::vector<VarPtr<T>>{x, w, b}
                           : std::vector<VarPtr<T>>{x, w});
  {
    std::vector<T> col(static_cast<std::size_t>(ckk) * ohw);
    for (int i = 0; i < n; ++i) {
      im2col(x->val.data() + static_cast<std::size_t>(i) * c * h * wd, c, h, wd,
             kh, kw, spec, g, col.data());
      T* y = out->val.data() + static_cast<std::size_t>(i) * oc * ohw;
      gemm_nn(w->val.data(), col.data(), y, oc, ckk, ohw);
      if (b) {
        for (int o = 0; o < oc; ++o) {
          const T bias = b->val[static_cast<std::size_t>(o)];
          T* row = y + static_cast<std::size_t>(o) * ohw;
          for (int p = 0; p < ohw; ++p) row[p] += bias;
        }
      }
    }
  }

  out->backward_fn = [x, w, b, spec, g, n, c, h, wd, oc, kh, kw, ohw, ckk](Var<T>& o) {
    std::vector<T> col(static_cast<std::size_t>(ckk) * ohw);
    std::vector<T> dcol(static_cast<std::size_t>(ckk) * ohw);
    for (int i = 0; i < n; ++i) {
      const T* dy = o.grad.data() + static_cast<std::size_t>(i) * oc * ohw;
      if (w->requires_grad || x->requires_grad) {
        im2col(x->val.data() + static_cast<std::size_t>(i) * c * h * wd, c, h,
               wd, kh, kw, spec, g, col.data());
      }
      if (w->requires_grad) {
        gemm_nt(dy, col.data(), w->grad.data(), oc, ohw, ckk);
      }
      if (x->requires_grad) {
        std::fill(dcol.begin(), dcol.end(), T(0));
        gemm_tn(w->val.data(), dy, dcol.data(), ckk, oc, ohw);
        col2im_acc(dcol.data(), c, h, wd, kh, kw, spec, g,
                   x->grad.data() + static_cast<std::size_t>(i) * c * h * wd);
      }
      if (b && b->requires_grad) {
        for (int od = 0; od < oc; ++od) {
          T acc = 0;
          const T* row = dy + static_cast<std::size_t>(od) * ohw;
          for (int p = 0; p < ohw; ++p) acc += row[p];
          b->grad[static_cast<std::size_t>(od)] += acc;
        }
      }
    }
  };
  return out;
}

template <typename T>
VarPtr<T> maxpool2d(const VarPtr<T>& x, int kh, int kw, bool ceil_mode) {
  require_rank(x, 4, "maxpool2d");
  const int n = x->shape.d[0], c = x->shape.d[1], h = x->shape.d[2], w = x->shape.d[3];
  const int oh = ceil_mode ? (h + kh - 1) / kh : h / kh;
  const int ow = ceil_mode ? (w + kw - 1) / kw : w / kw;
  if (oh == 0 || ow == 0) throw_data("maxpool2d: window larger than input");
  auto out = new_node<T>(Shape::of({n, c, oh, ow}), {x});
  auto argmax = std::make_shared<std::vector<int>>(out->val.size());
  for (int i = 0; i < n * c; ++i) {
    const T* plane = x->val.data() + static_cast<std::size_t>(i) * h * w;
    T* oplane = out->val.data() + static_cast<std::size_t>(i) * oh * ow;
    int* aplane = argmax->data() + static_cast<std::size_t>(i) * oh * ow;
    for (int oi = 0; oi < oh; ++oi) {
      for (int oj = 0; oj < ow; ++oj) {
        const int i0 = oi * kh, j0 = oj * kw;
        const int i1 = std::min(i0 + kh, h), j1 = std::min(j0 + kw, w);
        T best = plane[i0 * w + j0];
        int best_idx = i0 * w + j0;
        for (int ii = i0; ii < i1; ++ii) {
          for (int jj = j0; jj < j1; ++jj) {
            if (plane[ii * w + jj] > best) {
              best = plane[ii * w + jj];
              best_idx = ii * w + jj;
            }
          }
        }
        oplane[oi * ow + oj] = best;
        aplane[oi * ow + oj] = best_idx;
      }
    }
  }
  out->backward_fn = [x, argmax, n, c, h, w, oh, ow](Var<T>& o) {
    if (!x->requires_grad) return;
    for (int i = 0; i < n * c; ++i) {
      T* dplane = x->grad.data() + static_cast<std::size_t>(i) * h * w;
      const T* gplane = o.grad.data() + static_cast<std::size_t>(i) * oh * ow;
      const int* aplane = argmax->data() + static_cast<std::size_t>(i) * oh * ow;
      for (int p = 0; p < oh * ow; ++p) dplane[aplane[p]] += gplane[p];
    }
  };
  return out;
}

template <typename T>
VarPtr<T> global_maxpool(const VarPtr<T>& x) {
  require_rank(x, 4, "global_maxpool");
  const int n = x->shape.d[0], c = x->shape.d[1], hw = x->shape.d[2] * x->shape.d[3];
  auto out = new_node<T>(Shape::of({n, c}), {x});
  auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(n) * c);
  for (int i = 0; i < n * c; ++i) {
    const T* plane = x->val.data() + static_cast<std::size_t>(i) * hw;
    T best = plane[0];
    int best_idx = 0;
    for (int p = 1; p < hw; ++p) {
      if (plane[p] > best) {
        best = plane[p];
        best_idx = p;
      }
    }
    out->val[static_cast<std::size_t>(i)] = best;
    (*argmax)[static_cast<std::size_t>(i)] = best_idx;
  }
  out->backward_fn = [x, argmax, n, c, hw](Var<T>& o) {
    if (!x->requires_grad) return;
    for (int i = 0; i < n * c; ++i) {
      x->grad[static_cast<std::size_t>(i) * hw + (*argmax)[static_cast<std::size_t>(i)]] +=
          o.grad[static_cast<std::size_t>(i)];
    }
  };
  return out;
}

template <typename T>
VarPtr<T> concat_channels(const VarPtr<T>& a, const VarPtr<T>& b) {
  require_rank(a, 4, "concat_channels");
  require_rank(b, 4, "concat_channels");
  if (a->shape.d[0] != b->shape.d[0] || a->shape.d[2] != b->shape.d[2] ||
      a->shape.d[3] != b->shape.d[3]) {
    throw_data("concat_channels: spatial/batch mismatch " + a->shape.str() +
               " vs " + b->shape.str());
  }
  const int n = a->shape.d[0], ca = a->shape.d[1], cb = b->shape.d[1];
  const int hw = a->shape.d[2] * a->shape.d[3];
  auto out = new_node<T>(Shape::of({n, ca + cb, a->shape.d[2], a->shape.d[3]}), {a, b});
  for (int i = 0; i < n; ++i) {
    std::copy(a->val.data() + static_cast<std::size_t>(i) * ca * hw,
              a->val.data() + static_cast<std::size_t>(i + 1) * ca * hw,
              out->val.data() + static_cast<std::size_t>(i) * (ca + cb) * hw);
    std::copy(b->val.data() + static_cast<std::size_t>(i) * cb * hw,
              b->val.data() + static_cast<std::size_t>(i + 1) * cb * hw,
              out->val.data() + static_cast<std::size_t>(i) * (ca + cb) * hw +
                  static_cast<std::size_t>(ca) * hw);
  }
  out->backward_fn = [a, b, n, ca, cb, hw](Var<T>& o) {
    for (int i = 0; i < n; ++i) {
      const T* g = o.grad.data() + static_cast<std::size_t>(i) * (ca + cb) * hw;
      if (a->requires_grad) {
        T* dst = a->grad.data() + static_cast<std::size_t>(i) * ca * hw;
        for (int p = 0; p < ca * hw; ++p) dst[p] += g[p];
      }
      if (b->requires_grad) {
        T* dst = b->grad.data() + static_cast<std::size_t>(i) * cb * hw;
        const T* src = g + static_cast<std::size_t>(ca) * hw;
        for (int p = 0; p < cb * hw; ++p) dst[p] += src[p];
      }
    }
  };
  return out;
}

template <typename T>
VarPtr<T> film(const VarPtr<T>& x, const VarPtr<T>& gamma, const VarPtr<T>& beta) {
  require_rank(x, 4, "film(x)");
  const int n = x->shape.d[0], c = x->shape.d[1], hw = x->shape.d[2] * x->shape.d[3];
  auto check_mod = [&](const VarPtr<T>& m, const char* who) {
    const bool per_channel = m->shape.rank == 1 && m->shape.d[0] == c;
    const bool per_sample =
        m->shape.rank == 2 && m->shape.d[0] == n && m->shape.d[1] == c;
    if (!per_channel && !per_sample) {
      throw_data(std::string("film: ") + who + " must be [C] or [N,C], got " +
                 m->shape.str());
    }
    return per_sample;
  };
  const bool gamma_per_sample = check_mod(gamma, "gamma");
  const bool beta_per_sample = check_mod(beta, "beta");

  auto out = new_node<T>(x->shape, {x, gamma, beta});
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const T gv = gamma->val[static_cast<std::size_t>(gamma_per_sample ? i * c + ch : ch)];
      const T bv = beta->val[static_cast<std::size_t>(beta_per_sample ? i * c + ch : ch)];
      const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
      for (int p = 0; p < hw; ++p) {
        out->val[base + p] = gv * x->val[base + p] + bv;
      }
    }
  }
  out->backward_fn = [x, gamma, beta, gamma_per_sample, beta_per_sample, n, c,
                      hw](Var<T>& o) {
    for (int i = 0; i < n; ++i) {
      for (int ch = 0; ch < c; ++ch) {
        const std::size_t gidx = static_cast<std::size_t>(gamma_per_sample ? i * c + ch : ch);
        const std::size_t bidx = static_cast<std::size_t>(beta_per_sample ? i * c + ch : ch);
        const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
        const T gv = gamma->val[gidx];
        T dgamma = 0, dbeta = 0;
        for (int p = 0; p < hw; ++p) {
          const T g = o.grad[base + p];
          if (x->requires_grad) x->grad[base + p] += gv * g;
          dgamma += g * x->val[base + p];
          dbeta += g;
        }
        if (gamma->requires_grad) gamma->grad[gidx] += dgamma;
        if (beta->requires_grad) beta->grad[bidx] += dbeta;
      }
    }
  };
  return out;
}

template <typename T>
VarPtr<T> freq_mean_to_seq(const VarPtr<T>& x) {
  require_rank(x, 4, "freq_mean_to_seq");
  const int n = x->shape.d[0], c = x->shape.d[1], h = x->shape.d[2], w = x->shape.d[3];
  auto out = new_node<T>(Shape::of({n, w, c}), {x});
  const T inv_h = T(1) / static_cast<T>(h);
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      for (int j = 0; j < w; ++j) {
        T acc = 0;
        for (int ii = 0; ii < h; ++ii) {
          acc += x->val[((static_cast<std::size_t>(i) * c + ch) * h + ii) * w + j];
        }
        out->val[(static_cast<std::size_t>(i) * w + j) * c + ch] = acc * inv_h;
      }
    }
  }
  out->backward_fn = [x, n, c, h, w, inv_h](Var<T>& o) {
    if (!x->requires_grad) return;
    for (int i = 0; i < n; ++i) {
      for (int ch = 0; ch < c; ++ch) {
        for (int j = 0; j < w; ++j) {
          const T g = o.grad[(static_cast<std::size_t>(i) * w + j) * c + ch] * inv_h;
          for (int ii = 0; ii < h; ++ii) {
            x->grad[((static_cast<std::size_t>(i) * c + ch) * h + ii) * w + j] += g;
          }
        }
      }
    }
  };
  return out;
}

template <typename T>
VarPtr<T> batchnorm2d(const VarPtr<T>& x, const VarPtr<T>& gamma,
                      const VarPtr<T>& beta, BnBuffers<T>& buffers,
                      bool training, double momentum, double eps) {
  require_rank(x, 4, "batchnorm2d");
  const int n = x->shape.d[0], c = x->shape.d[1], hw = x->shape.d[2] * x->shape.d[3];
  if (static_cast<int>(buffers.running_mean.size()) != c) {
    throw_data("batchnorm2d: buffers not initialized for channel count");
  }
  const bool affine = gamma != nullptr;
  if (affine && (gamma->shape.numel() != c || beta->shape.numel() != c)) {
    throw_data("batchnorm2d: affine parameter shape mismatch");
  }
  const int m = n * hw;  // per-channel sample count

  auto mean = std::make_shared<std::vector<T>>(static_cast<std::size_t>(c));
  auto inv_std = std::make_shared<std::vector<T>>(static_cast<std::size_t>(c));
  if (training) {
    for (int ch = 0; ch < c; ++ch) {
      double acc = 0;
      for (int i = 0; i < n; ++i) {
        const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
        for (int p = 0; p < hw; ++p) acc += x->val[base + p];
      }
      const double mu = acc / m;
      double var = 0;
      for (int i = 0; i < n; ++i) {
        const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
        for (int p = 0; p < hw; ++p) {
          const double d = x->val[base + p] - mu;
          var += d * d;
        }
      }
      var /= m;
      (*mean)[static_cast<std::size_t>(ch)] = static_cast<T>(mu);
      (*inv_std)[static_cast<std::size_t>(ch)] = static_cast<T>(1.0 / std::sqrt(var + eps));
      buffers.running_mean[static_cast<std::size_t>(ch)] = static_cast<T>(
          (1.0 - momentum) * buffers.running_mean[static_cast<std::size_t>(ch)] +
          momentum * mu);
      buffers.running_var[static_cast<std::size_t>(ch)] = static_cast<T>(
          (1.0 - momentum) * buffers.running_var[static_cast<std::size_t>(ch)] +
          momentum * var);
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      (*mean)[static_cast<std::size_t>(ch)] = buffers.running_mean[static_cast<std::size_t>(ch)];
      (*inv_std)[static_cast<std::size_t>(ch)] = static_cast<T>(
          1.0 / std::sqrt(static_cast<double>(buffers.running_var[static_cast<std::size_t>(ch)]) + eps));
    }
  }

  auto out = new_node<T>(x->shape, affine ? std::vector<VarPtr<T>>{x, gamma, beta}
                                          : std::vector<VarPtr<T>>{x});
  auto xhat = std::make_shared<std::vector<T>>(x->val.size());
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
      const T mu = (*mean)[static_cast<std::size_t>(ch)];
      const T is = (*inv_std)[static_cast<std::size_t>(ch)];
      const T gv = affine ? gamma->val[static_cast<std::size_t>(ch)] : T(1);
      const T bv = affine ? beta->val[static_cast<std::size_t>(ch)] : T(0);
      for (int p = 0; p < hw; ++p) {
        const T xh = (x->val[base + p] - mu) * is;
        (*xhat)[base + p] = xh;
        out->val[base + p] = gv * xh + bv;
      }
    }
  }

  out->backward_fn = [x, gamma, beta, xhat, inv_std, affine, training, n, c, hw,
                      m](Var<T>& o) {
    for (int ch = 0; ch < c; ++ch) {
      const T is = (*inv_std)[static_cast<std::size_t>(ch)];
      const T gv = affine ? gamma->val[static_cast<std::size_t>(ch)] : T(1);
      // Per-channel reductions of dy and dy*xhat.
      double sum_dy = 0, sum_dy_xhat = 0;
      for (int i = 0; i < n; ++i) {
        const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
        for (int p = 0; p < hw; ++p) {
          sum_dy += o.grad[base + p];
          sum_dy_xhat += static_cast<double>(o.grad[base + p]) * (*xhat)[base + p];
        }
      }
      if (affine && gamma->requires_grad) {
        gamma->grad[static_cast<std::size_t>(ch)] += static_cast<T>(sum_dy_xhat);
        beta->grad[static_cast<std::size_t>(ch)] += static_cast<T>(sum_dy);
      }
      if (!x->requires_grad) continue;
      if (training) {
        for (int i = 0; i < n; ++i) {
          const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
          for (int p = 0; p < hw; ++p) {
            const double dxhat = static_cast<double>(o.grad[base + p]) * gv;
            const double term = m * dxhat - sum_dy * gv -
                                (*xhat)[base + p] * sum_dy_xhat * gv;
            x->grad[base + p] += static_cast<T>(is * term / m);
          }
        }
      } else {
        for (int i = 0; i < n; ++i) {
          const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
          for (int p = 0; p < hw; ++p) {
            x->grad[base + p] += o.grad[base + p] * gv * is;
          }
        }
      }
    }
  };
  return out;
}

// ---------------------------------------------------------------------------
// GRU and loss
// ---------------------------------------------------------------------------

template <typename T>
VarPtr<T> gru_seq(const VarPtr<T>& x, const std::vector<int>& lengths,
                  const GruWeights<T>& w) {
  require_rank(x, 3, "gru_seq");
  const int n = x->shape.d[0], steps = x->shape.d[1];
  const int g = w.hidden;
  if (steps < 1) throw_data("gru_seq: empty sequence");
  if (w.w_ih->shape.d[0] != 3 * g || w.w_hh->shape.d[0] != 3 * g) {
    throw_data("gru_seq: packed weights must have 3*hidden rows");
  }
  std::vector<int> lens = lengths;
  if (lens.empty()) lens.assign(static_cast<std::size_t>(n), steps);
  for (int l : lens) {
    if (l < 1 || l > steps) throw_data("gru_seq: length out of range");
  }

  VarPtr<T> h = make_var<T>(Shape::of({n, g}), false);  // zero initial state
  for (int t = 0; t < steps; ++t) {
    auto x_t = slice_time(x, t);
    auto gates_x = linear(x_t, w.w_ih, w.b_ih);   // [N, 3G]
    auto gates_h = linear(h, w.w_hh, w.b_hh);     // [N, 3G]
    auto r = sigmoid(add(slice_cols(gates_x, 0, g), slice_cols(gates_h, 0, g)));
    auto z = sigmoid(add(slice_cols(gates_x, g, g), slice_cols(gates_h, g, g)));
    auto cand = tanh_act(add(slice_cols(gates_x, 2 * g, g),
                             mul(r, slice_cols(gates_h, 2 * g, g))));
    // h_t = (1 - z) * cand + z * h_{t-1}
    auto h_new = add(mul(affine_const<T>(z, T(-1), T(1)), cand), mul(z, h));
    std::vector<T> mask(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      mask[static_cast<std::size_t>(i)] = t < lens[static_cast<std::size_t>(i)] ? T(1) : T(0);
    }
    h = masked_update(h_new, h, mask);
  }
  return h;
}

template <typename T>
VarPtr<T> softmax_cross_entropy(const VarPtr<T>& logits,
                                const std::vector<int>& targets) {
  require_rank(logits, 2, "softmax_cross_entropy");
  const int n = logits->shape.d[0], o = logits->shape.d[1];
  if (static_cast<int>(targets.size()) != n) {
    throw_data("softmax_cross_entropy: target count != batch");
  }
  for (int t : targets) {
    if (t < 0 || t >= o) throw_data("softmax_cross_entropy: target out of range");
  }
  auto out = new_node<T>(Shape::of({1}), {logits});
  auto probs = std::make_shared<std::vector<T>>(logits->val.size());
  double loss = 0;
  for (int i = 0; i < n; ++i) {
    const T* row = logits->val.data() + static_cast<std::size_t>(i) * o;
    T mx = row[0];
    for (int j = 1; j < o; ++j) mx = std::max(mx, row[j]);
    double denom = 0;
    for (int j = 0; j < o; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    for (int j = 0; j < o; ++j) {
      (*probs)[static_cast<std::size_t>(i) * o + j] =
          static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / denom);
    }
    loss += std::log(denom) + mx - row[targets[static_cast<std::size_t>(i)]];
  }
  out->val[0] = static_cast<T>(loss / n);
  auto targets_copy = std::make_shared<std::vector<int>>(targets);
  out->backward_fn = [logits, probs, targets_copy, n, o](Var<T>& out_node) {
    if (!logits->requires_grad) return;
    const T upstream = out_node.grad[0];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < o; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * o + j;
        T p = (*probs)[idx];
        if (j == (*targets_copy)[static_cast<std::size_t>(i)]) p -= T(1);
        logits->grad[idx] += upstream * p / static_cast<T>(n);
      }
    }
  };
  return out;
}

template <typename T>
std::vector<T> softmax_rows(const Var<T>& logits) {
  const int n = logits.shape.d[0], o = logits.shape.d[1];
  std::vector<T> out(logits.val.size());
  for (int i = 0; i < n; ++i) {
    const T* row = logits.val.data() + static_cast<std::size_t>(i) * o;
    T mx = row[0];
    for (int j = 1; j < o; ++j) mx = std::max(mx, row[j]);
    double denom = 0;
    for (int j = 0; j < o; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    for (int j = 0; j < o; ++j) {
      out[static_cast<std::size_t>(i) * o + j] =
          static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / denom);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer / gradient checking
// ---------------------------------------------------------------------------

template <typename T>
typename Adam<T>::Slot& Adam<T>::slot_for(Var<T>* p) {
  for (auto& [var, slot] : state_) {
    if (var == p) return slot;
  }
  state_.emplace_back(p, Slot{});
  auto& slot = state_.back().second;
  slot.m.assign(p->val.size(), 0.0);
  slot.v.assign(p->val.size(), 0.0);
  return slot;
}

template <typename T>
void Adam<T>::step(const std::vector<VarPtr<T>>& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (const auto& p : params) {
    if (!p->requires_grad) continue;
    Slot& slot = slot_for(p.get());
    for (std::size_t i = 0; i < p->val.size(); ++i) {
      // L2 regularization folded into the gradient.
      const double g = static_cast<double>(p->grad[i]) +
                       weight_decay_ * static_cast<double>(p->val[i]);
      slot.m[i] = beta1_ * slot.m[i] + (1.0 - beta1_) * g;
      slot.v[i] = beta2_ * slot.v[i] + (1.0 - beta2_) * g * g;
      const double mhat = slot.m[i] / bc1;
      const double vhat = slot.v[i] / bc2;
      p->val[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

void zero_grad(const std::vector<VarPtr<float>>& params) {
  for (const auto& p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0f);
}
void zero_grad(const std::vector<VarPtr<double>>& params) {
  for (const auto& p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

GradCheckReport grad_check(
    const std::function<VarPtr<double>(const std::vector<VarPtr<double>>&)>& fn,
    const std::vector<VarPtr<double>>& inputs,
    const std::vector<std::string>& names, double h) {
  GradCheckReport report;
  zero_grad(inputs);
  auto root = fn(inputs);
  backward(root);
  std::vector<std::vector<double>> analytic;
  for (const auto& in : inputs) analytic.push_back(in->grad);

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    GradCheckEntry entry;
    entry.name = k < names.size() ? names[k] : "input" + std::to_string(k);
    for (std::size_t i = 0; i < inputs[k]->val.size(); ++i) {
      const double keep = inputs[k]->val[i];
      inputs[k]->val[i] = keep + h;
      const double f_plus = fn(inputs)->scalar();
      inputs[k]->val[i] = keep - h;
      const double f_minus = fn(inputs)->scalar();
      inputs[k]->val[i] = keep;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[k][i];
      // The 1e-3 floor keeps central-difference roundoff on near-zero
      // gradients from masquerading as relative error.
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-3});
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Explicit instantiations (float for training, double for checking)
// ---------------------------------------------------------------------------

#define AQA_INSTANTIATE(T)                                                     \
  template VarPtr<T> make_var<T>(const Shape&, bool);                          \
  template VarPtr<T> make_const<T>(const Shape&, std::vector<T>);              \
  template void backward<T>(const VarPtr<T>&);                                 \
  template VarPtr<T> add<T>(const VarPtr<T>&, const VarPtr<T>&);               \
  template VarPtr<T> mul<T>(const VarPtr<T>&, const VarPtr<T>&);               \
  template VarPtr<T> affine_const<T>(const VarPtr<T>&, T, T);                  \
  template VarPtr<T> relu<T>(const VarPtr<T>&);                                \
  template VarPtr<T> sigmoid<T>(const VarPtr<T>&);                             \
  template VarPtr<T> tanh_act<T>(const VarPtr<T>&);                            \
  template VarPtr<T> dropout<T>(const VarPtr<T>&, double, bool, Pcg32&);       \
  template VarPtr<T> sum_all<T>(const VarPtr<T>&);                             \
  template VarPtr<T> linear<T>(const VarPtr<T>&, const VarPtr<T>&,             \
                               const VarPtr<T>&);                              \
  template VarPtr<T> embedding_lookup<T>(const std::vector<int>&, int, int,    \
                                         const VarPtr<T>&);                    \
  template VarPtr<T> slice_cols<T>(const VarPtr<T>&, int, int);                \
  template VarPtr<T> slice_time<T>(const VarPtr<T>&, int);                     \
  template VarPtr<T> masked_update<T>(const VarPtr<T>&, const VarPtr<T>&,      \
                                      const std::vector<T>&);                  \
  template VarPtr<T> conv2d<T>(const VarPtr<T>&, const VarPtr<T>&,             \
                               const VarPtr<T>&, const Conv2dSpec&);           \
  template VarPtr<T> maxpool2d<T>(const VarPtr<T>&, int, int, bool);           \
  template VarPtr<T> global_maxpool<T>(const VarPtr<T>&);                      \
  template VarPtr<T> concat_channels<T>(const VarPtr<T>&, const VarPtr<T>&);   \
  template VarPtr<T> film<T>(const VarPtr<T>&, const VarPtr<T>&,               \
                             const VarPtr<T>&);                                \
  template VarPtr<T> freq_mean_to_seq<T>(const VarPtr<T>&);                    \
  template VarPtr<T> batchnorm2d<T>(const VarPtr<T>&, const VarPtr<T>&,        \
                                    const VarPtr<T>&, BnBuffers<T>&, bool,     \
                                    double, double);                           \
  template VarPtr<T> gru_seq<T>(const VarPtr<T>&, const std::vector<int>&,     \
                                const GruWeights<T>&);                         \
  template VarPtr<T> softmax_cross_entropy<T>(const VarPtr<T>&,                \
                                              const std::vector<int>&);        \
  template std::vector<T> softmax_rows<T>(const Var<T>&);                      \
  template class Adam<T>;

AQA_INSTANTIATE(float)
AQA_INSTANTIATE(double)

#undef AQA_INSTANTIATE

}  // namespace aqa::ad
