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

// Reverse-mode autodiff covering exactly the operator set the model needs.
// Define-by-run: every op allocates a node holding its value, gradient
// accumulator, parents, and a closure that routes the gradient backward.
// Instantiated for float (training) and double (gradient checking).

#ifndef AQA_AUTODIFF_HPP_
#define AQA_AUTODIFF_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aqa/common.hpp"

namespace aqa::ad {

#ifdef AQA_REAL64
using Real = double;
#else
using Real = float;
#endif

struct Shape {
  std::array<int, 4> d{1, 1, 1, 1};
  int rank = 0;

  static Shape of(std::initializer_list<int> dims) {
    Shape s;
    s.rank = static_cast<int>(dims.size());
    int i = 0;
    for (int v : dims) s.d[static_cast<std::size_t>(i++)] = v;
    return s;
  }
  int numel() const {
    int n = 1;
    for (int i = 0; i < rank; ++i) n *= d[static_cast<std::size_t>(i)];
    return n;
  }
  bool operator==(const Shape& o) const { return rank == o.rank && d == o.d; }
  std::string str() const;
};

template <typename T>
struct Var {
  Shape shape;
  std::vector<T> val;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Var<T>>> parents;
  std::function<void(Var<T>&)> backward_fn;

  T scalar() const { return val[0]; }
};

template <typename T>
using VarPtr = std::shared_ptr<Var<T>>;

template <typename T>
VarPtr<T> make_var(const Shape& shape, bool requires_grad);
template <typename T>
VarPtr<T> make_const(const Shape& shape, std::vector<T> values);

// Reverse pass from a scalar root (throws if root is not a scalar).
template <typename T>
void backward(const VarPtr<T>& root);

// ---------------------------------------------------------------------------
// Elementwise and linear algebra
// ---------------------------------------------------------------------------

template <typename T>
VarPtr<T> add(const VarPtr<T>& a, const VarPtr<T>& b);
template <typename T>
VarPtr<T> mul(const VarPtr<T>& a, const VarPtr<T>& b);
// a*x + b with scalar constants.
template <typename T>
VarPtr<T> affine_const(const VarPtr<T>& x, T a, T b);
template <typename T>
VarPtr<T> relu(const VarPtr<T>& x);
template <typename T>
VarPtr<T> sigmoid(const VarPtr<T>& x);
template <typename T>
VarPtr<T> tanh_act(const VarPtr<T>& x);
// Inverted dropout: survivors scaled by 1/(1-p); identity in eval mode.
template <typename T>
VarPtr<T> dropout(const VarPtr<T>& x, double p, bool training, Pcg32& rng);

// Scalar sum of every element (the reduction used by tests and probes).
template <typename T>
VarPtr<T> sum_all(const VarPtr<T>& x);

// x:[N,in] w:[out,in] b:[out] -> [N,out]. b may be null.
template <typename T>
VarPtr<T> linear(const VarPtr<T>& x, const VarPtr<T>& w, const VarPtr<T>& b);

// ids laid out [n][t]; table [V,E] -> [n,t,E].
template <typename T>
VarPtr<T> embedding_lookup(const std::vector<int>& ids, int n, int t,
                           const VarPtr<T>& table);

// [N,F] columns start..start+len.
template <typename T>
VarPtr<T> slice_cols(const VarPtr<T>& x, int start, int len);
// [N,T,E] -> [N,E] at timestep t.
template <typename T>
VarPtr<T> slice_time(const VarPtr<T>& x, int t);

// out = mask*h_new + (1-mask)*h_prev, mask per row (no gradient to mask).
template <typename T>
VarPtr<T> masked_update(const VarPtr<T>& h_new, const VarPtr<T>& h_prev,
                        const std::vector<T>& row_mask);

// ---------------------------------------------------------------------------
// Spatial ops (NCHW)
// ---------------------------------------------------------------------------

enum class Padding { kSame, kValid };

struct Conv2dSpec {
  int stride_h = 1;
  int stride_w = 1;
  Padding padding = Padding::kSame;
};

// Cross-correlation. x:[N,C,H,W] w:[OC,C,KH,KW] b:[OC] (nullable).
// Same padding: out = ceil(in/stride), extra pad goes bottom/right.
template <typename T>
VarPtr<T> conv2d(const VarPtr<T>& x, const VarPtr<T>& w, const VarPtr<T>& b,
                 const Conv2dSpec& spec);

// Stride = kernel. ceil_mode admits a partial trailing window (clamped to
// the input), which is what keeps the two extractor pipelines shape-dual.
template <typename T>
VarPtr<T> maxpool2d(const VarPtr<T>& x, int kh, int kw, bool ceil_mode = false);

// [N,C,H,W] -> [N,C]; gradient routes to each channel argmax.
template <typename T>
VarPtr<T> global_maxpool(const VarPtr<T>& x);

// Channel concat along C.
template <typename T>
VarPtr<T> concat_channels(const VarPtr<T>& a, const VarPtr<T>& b);

// gamma, beta: [C] or [N,C]; out = gamma*x + beta per channel.
template <typename T>
VarPtr<T> film(const VarPtr<T>& x, const VarPtr<T>& gamma, const VarPtr<T>& beta);

// Mean over the frequency axis: [N,C,H,W] -> [N,W,C] sequence.
template <typename T>
VarPtr<T> freq_mean_to_seq(const VarPtr<T>& x);

template <typename T>
struct BnBuffers {
  std::vector<T> running_mean;
  std::vector<T> running_var;
  void init(int channels) {
    running_mean.assign(static_cast<std::size_t>(channels), T(0));
    running_var.assign(static_cast<std::size_t>(channels), T(1));
  }
};

// Per-channel batch normalization; gamma/beta null => affine off (no
// learnable parameters). Training mode uses (and updates) batch statistics,
// eval mode uses the running buffers.
template <typename T>
VarPtr<T> batchnorm2d(const VarPtr<T>& x, const VarPtr<T>& gamma,
                      const VarPtr<T>& beta, BnBuffers<T>& buffers,
                      bool training, double momentum = 0.1, double eps = 1e-5);

// ---------------------------------------------------------------------------
// Sequence and loss ops
// ---------------------------------------------------------------------------

template <typename T>
struct GruWeights {
  // Packed gate order: reset, update, candidate.
  VarPtr<T> w_ih;  // [3G, E]
  VarPtr<T> w_hh;  // [3G, G]
  VarPtr<T> b_ih;  // [3G]
  VarPtr<T> b_hh;  // [3G]
  int hidden = 0;
};

// x:[N,T,E]; masked so each row's hidden state freezes at its true length.
// Returns [N,G].
template <typename T>
VarPtr<T> gru_seq(const VarPtr<T>& x, const std::vector<int>& lengths,
                  const GruWeights<T>& w);

// Mean cross entropy over the batch; logits [N,O].
template <typename T>
VarPtr<T> softmax_cross_entropy(const VarPtr<T>& logits,
                                const std::vector<int>& targets);

// Row-wise softmax of a value tensor (inference utility).
template <typename T>
std::vector<T> softmax_rows(const Var<T>& logits);

// ---------------------------------------------------------------------------
// Optimizer and gradient checking
// ---------------------------------------------------------------------------

template <typename T>
class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
       double weight_decay = 0.0)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        weight_decay_(weight_decay) {}

  void step(const std::vector<VarPtr<T>>& params);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  int t() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_, weight_decay_;
  int t_ = 0;
  struct Slot {
    std::vector<double> m, v;
  };
  std::vector<std::pair<Var<T>*, Slot>> state_;
  Slot& slot_for(Var<T>* p);
};

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;
  bool passed(double tolerance) const { return max_rel_err < tolerance; }
};

// Central differences (h = 1e-5) against the analytic gradient, in double.
GradCheckReport grad_check(
    const std::function<VarPtr<double>(const std::vector<VarPtr<double>>&)>& fn,
    const std::vector<VarPtr<double>>& inputs,
    const std::vector<std::string>& names, double h = 1e-5);

void zero_grad(const std::vector<VarPtr<float>>& params);
void zero_grad(const std::vector<VarPtr<double>>& params);

}  // namespace aqa::ad

#endif  // AQA_AUTODIFF_HPP_
