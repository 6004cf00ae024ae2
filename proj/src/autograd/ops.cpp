#include "qot/autograd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qot/core/error.hpp"
#include "qot/core/hamilton_kernels.hpp"
#include "qot/core/quat_tensor.hpp"
#include "qot/core/softmax.hpp"

namespace qot::ag {

namespace {

Tensor* grad_of(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

const Tensor& value_of(const Node& self, std::size_t i) { return self.parents[i]->value; }

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

void require_quat(const Var& x, std::size_t logical_rank, const char* op) {
  const Shape& s = x.shape();
  if (s.size() != logical_rank + 1 || s.back() != 4) {
    throw DimensionError(std::string(op) + ": expected quaternion tensor of logical rank " +
                         std::to_string(logical_rank) + ", got " + to_string(s));
  }
}

struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit around(const Shape& s, std::size_t axis) {
  AxisSplit r;
  for (std::size_t a = 0; a < axis; ++a) r.outer *= s[a];
  r.extent = s[axis];
  for (std::size_t a = axis + 1; a < s.size(); ++a) r.inner *= s[a];
  return r;
}

double gaussian_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }
double gaussian_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t padding) {
  if (stride == 0 || k == 0 || in + 2 * padding < k) {
    throw DimensionError("convolution geometry: input " + std::to_string(in) + ", kernel " + std::to_string(k) +
                         ", stride " + std::to_string(stride) + ", padding " + std::to_string(padding));
  }
  return (in + 2 * padding - k) / stride + 1;
}

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  return make_result("add", qot::add(a.value(), b.value()), {a, b}, [](Node& self) {
    for (std::size_t i = 0; i < 2; ++i)
      if (Tensor* g = grad_of(self, i))
        for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += self.grad[n];
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  return make_result("sub", qot::sub(a.value(), b.value()), {a, b}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += self.grad[n];
    if (Tensor* g = grad_of(self, 1))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] -= self.grad[n];
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = a.value()[n] * b.value()[n];
  return make_result("mul", std::move(out), {a, b}, [](Node& self) {
    const Tensor& av = value_of(self, 0);
    const Tensor& bv = value_of(self, 1);
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += self.grad[n] * bv[n];
    if (Tensor* g = grad_of(self, 1))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += self.grad[n] * av[n];
  });
}

Var scale(const Var& x, double s) {
  return make_result("scale", qot::scale(x.value(), s), {x}, [s](Node& self) {
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += s * self.grad[n];
  });
}

Var add_broadcast(const Var& x, const Var& b) {
  const Shape& xs = x.shape();
  const Shape& bs = b.shape();
  if (bs.size() > xs.size() || !std::equal(bs.begin(), bs.end(), xs.end() - static_cast<std::ptrdiff_t>(bs.size()))) {
    throw DimensionError("add_broadcast: " + to_string(bs) + " is not a trailing suffix of " + to_string(xs));
  }
  const std::size_t inner = b.value().size();
  Tensor out = x.value();
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += b.value()[n % inner];
  return make_result("add_broadcast", std::move(out), {x, b}, [inner](Node& self) {
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += self.grad[n];
    if (Tensor* g = grad_of(self, 1))
      for (std::size_t n = 0; n < self.grad.size(); ++n) (*g)[n % inner] += self.grad[n];
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return make_result("sum", Tensor::scalar(total), {x}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += self.grad[0];
  });
}

Var mean(const Var& x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var reshape(const Var& x, Shape shape) {
  return make_result("reshape", x.value().reshape(std::move(shape)), {x}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += self.grad[n];
  });
}

Var transpose01(const Var& x) {
  return make_result("transpose01", qot::transpose01(x.value()), {x}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      Tensor back = qot::transpose01(self.grad);
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += back[n];
    }
  });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  std::vector<Tensor> values;
  std::vector<std::size_t> extents;
  for (const Var& p : parts) {
    values.push_back(p.value());
    if (axis >= p.shape().size()) throw DimensionError("concat axis out of range for " + to_string(p.shape()));
    extents.push_back(p.shape()[axis]);
  }
  return make_result("concat", qot::concat(values, axis), std::vector<Var>(parts.begin(), parts.end()),
                     [axis, extents](Node& self) {
                       std::vector<Tensor> pieces = qot::split(self.grad, axis, extents);
                       for (std::size_t i = 0; i < pieces.size(); ++i)
                         if (Tensor* g = grad_of(self, i))
                           for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += pieces[i][n];
                     });
}

Var conjugate(const Var& x) {
  if (x.shape().empty() || x.shape().back() != 4) {
    throw DimensionError("conjugate: not a quaternion tensor " + to_string(x.shape()));
  }
  Tensor out = x.value();
  for (std::size_t n = 0; n < out.size(); ++n)
    if (n % 4) out[n] = -out[n];
  return make_result("conjugate", std::move(out), {x}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += (n % 4) ? -self.grad[n] : self.grad[n];
  });
}

Var stack_components(const Var& r, const Var& i, const Var& j, const Var& k) {
  QuatTensor q = QuatTensor::stack(r.value(), i.value(), j.value(), k.value());
  return make_result("stack_components", std::move(q.base()), {r, i, j, k}, [](Node& self) {
    for (std::size_t c = 0; c < 4; ++c)
      if (Tensor* g = grad_of(self, c))
        for (std::size_t n = 0; n < g->size(); ++n) (*g)[n] += self.grad[4 * n + c];
  });
}

Var relu(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = std::max(v, 0.0);
  return make_result("relu", std::move(out), {x}, [](Node& self) {
    const Tensor& xv = value_of(self, 0);
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n)
        if (xv[n] > 0.0) (*g)[n] += self.grad[n];
  });
}

Var gelu(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = v * gaussian_cdf(v);
  return make_result("gelu", std::move(out), {x}, [](Node& self) {
    const Tensor& xv = value_of(self, 0);
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t n = 0; n < g->size(); ++n)
        (*g)[n] += self.grad[n] * (gaussian_cdf(xv[n]) + xv[n] * gaussian_pdf(xv[n]));
  });
}

Var softmax(const Var& x, std::size_t axis) {
  if (axis >= x.shape().size()) throw DimensionError("softmax axis out of range for " + to_string(x.shape()));
  const AxisSplit s = around(x.shape(), axis);
  if (s.extent == 0) throw DimensionError("softmax over empty axis");
  Tensor out = x.value();
  kernels::softmax_strided(out.data(), s.outer, s.extent, s.inner);
  return make_result("softmax", std::move(out), {x}, [s](Node& self) {
    Tensor* g = grad_of(self, 0);
    if (!g) return;
    const Tensor& y = self.value;
    for (std::size_t o = 0; o < s.outer; ++o)
      for (std::size_t c = 0; c < s.inner; ++c) {
        const std::size_t base = o * s.extent * s.inner + c;
        double dot = 0.0;
        for (std::size_t e = 0; e < s.extent; ++e) dot += self.grad[base + e * s.inner] * y[base + e * s.inner];
        for (std::size_t e = 0; e < s.extent; ++e) {
          const std::size_t n = base + e * s.inner;
          (*g)[n] += y[n] * (self.grad[n] - dot);
        }
      }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require_same(gamma, beta, "layer_norm");
  const std::size_t group = gamma.value().size();
  if (group == 0 || x.value().size() % group != 0 ||
      !std::equal(gamma.shape().rbegin(), gamma.shape().rend(), x.shape().rbegin())) {
    throw DimensionError("layer_norm: affine shape " + to_string(gamma.shape()) + " does not trail " +
                         to_string(x.shape()));
  }
  const std::size_t rows = x.value().size() / group;
  Tensor xhat(x.shape());
  std::vector<double> inv_std(rows);
  Tensor out(x.shape());
  const Tensor& xv = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * group;
    double mu = 0.0;
    for (std::size_t n = 0; n < group; ++n) mu += xv[base + n];
    mu /= static_cast<double>(group);
    double var = 0.0;
    for (std::size_t n = 0; n < group; ++n) var += (xv[base + n] - mu) * (xv[base + n] - mu);
    var /= static_cast<double>(group);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t n = 0; n < group; ++n) {
      xhat[base + n] = (xv[base + n] - mu) * inv_std[r];
      out[base + n] = gamma.value()[n] * xhat[base + n] + beta.value()[n];
    }
  }
  return make_result(
      "layer_norm", std::move(out), {x, gamma, beta},
      [group, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const Tensor& gv = value_of(self, 1);
        Tensor* gx = grad_of(self, 0);
        Tensor* gg = grad_of(self, 1);
        Tensor* gb = grad_of(self, 2);
        const double inv_n = 1.0 / static_cast<double>(group);
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t base = r * group;
          double mean_d = 0.0, mean_dx = 0.0;
          for (std::size_t n = 0; n < group; ++n) {
            const double d = self.grad[base + n] * gv[n];
            mean_d += d;
            mean_dx += d * xhat[base + n];
            if (gg) (*gg)[n] += self.grad[base + n] * xhat[base + n];
            if (gb) (*gb)[n] += self.grad[base + n];
          }
          if (!gx) continue;
          mean_d *= inv_n;
          mean_dx *= inv_n;
          for (std::size_t n = 0; n < group; ++n) {
            const double d = self.grad[base + n] * gv[n];
            (*gx)[base + n] += inv_std[r] * (d - mean_d - xhat[base + n] * mean_dx);
          }
        }
      });
}

Var matmul(const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    throw DimensionError("matmul shape mismatch " + to_string(sa) + " · " + to_string(sb));
  }
  const std::size_t m = sa[0], n = sa[1], p = sb[1];
  Tensor out({m, p});
  const auto av = a.value().data();
  const auto bv = b.value().data();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      const double x = av[r * n + k];
      for (std::size_t c = 0; c < p; ++c) out[r * p + c] += x * bv[k * p + c];
    }
  return make_result("matmul", std::move(out), {a, b}, [m, n, p](Node& self) {
    const auto av = value_of(self, 0).data();
    const auto bv = value_of(self, 1).data();
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t k = 0; k < n; ++k) {
          double acc = 0.0;
          for (std::size_t c = 0; c < p; ++c) acc += self.grad[r * p + c] * bv[k * p + c];
          (*g)[r * n + k] += acc;
        }
    if (Tensor* g = grad_of(self, 1))
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t k = 0; k < n; ++k) {
          const double x = av[r * n + k];
          for (std::size_t c = 0; c < p; ++c) (*g)[k * p + c] += x * self.grad[r * p + c];
        }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  Var y = matmul(x, w);
  if (!b) return y;
  if (b.shape() != Shape{w.shape()[1]}) {
    throw DimensionError("linear bias " + to_string(b.shape()) + " vs weight " + to_string(w.shape()));
  }
  return add_broadcast(y, b);
}

Var conv2d(const Var& x, const Var& kernel, const Var& b, std::size_t stride, std::size_t padding) {
  const Shape& xs = x.shape();
  const Shape& ks = kernel.shape();
  if (xs.size() != 3 || ks.size() != 4 || ks[2] != xs[2]) {
    throw DimensionError("conv2d: input " + to_string(xs) + " vs kernel " + to_string(ks));
  }
  const std::size_t H = xs[0], W = xs[1], cin = xs[2], kh = ks[0], kw = ks[1], cout = ks[3];
  if (b && b.shape() != Shape{cout}) throw DimensionError("conv2d bias " + to_string(b.shape()));
  const std::size_t OH = conv_out_extent(H, kh, stride, padding);
  const std::size_t OW = conv_out_extent(W, kw, stride, padding);
  Tensor out({OH, OW, cout});
  const auto xv = x.value().data();
  const auto kv = kernel.value().data();
  for (std::size_t oy = 0; oy < OH; ++oy)
    for (std::size_t ox = 0; ox < OW; ++ox) {
      double* o = &out[(oy * OW + ox) * cout];
      if (b)
        for (std::size_t c = 0; c < cout; ++c) o[c] = b.value()[c];
      for (std::size_t u = 0; u < kh; ++u) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + u) - static_cast<std::ptrdiff_t>(padding);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
        for (std::size_t v = 0; v < kw; ++v) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + v) - static_cast<std::ptrdiff_t>(padding);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
          const double* in = &xv[(static_cast<std::size_t>(iy) * W + static_cast<std::size_t>(ix)) * cin];
          const double* kp = &kv[(u * kw + v) * cin * cout];
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const double xin = in[ci];
            const double* kr = kp + ci * cout;
            for (std::size_t c = 0; c < cout; ++c) o[c] += xin * kr[c];
          }
        }
      }
    }
  std::vector<Var> inputs{x, kernel};
  if (b) inputs.push_back(b);
  return make_result("conv2d", std::move(out), std::move(inputs),
                     [=, has_bias = static_cast<bool>(b)](Node& self) {
                       const auto xv = value_of(self, 0).data();
                       const auto kv = value_of(self, 1).data();
                       Tensor* gx = grad_of(self, 0);
                       Tensor* gk = grad_of(self, 1);
                       Tensor* gb = has_bias ? grad_of(self, 2) : nullptr;
                       for (std::size_t oy = 0; oy < OH; ++oy)
                         for (std::size_t ox = 0; ox < OW; ++ox) {
                           const double* go = &self.grad[(oy * OW + ox) * cout];
                           if (gb)
                             for (std::size_t c = 0; c < cout; ++c) (*gb)[c] += go[c];
                           for (std::size_t u = 0; u < kh; ++u) {
                             const std::ptrdiff_t iy =
                                 static_cast<std::ptrdiff_t>(oy * stride + u) - static_cast<std::ptrdiff_t>(padding);
                             if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
                             for (std::size_t v = 0; v < kw; ++v) {
                               const std::ptrdiff_t ix =
                                   static_cast<std::ptrdiff_t>(ox * stride + v) - static_cast<std::ptrdiff_t>(padding);
                               if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                               const std::size_t in_off =
                                   (static_cast<std::size_t>(iy) * W + static_cast<std::size_t>(ix)) * cin;
                               const std::size_t k_off = (u * kw + v) * cin * cout;
                               for (std::size_t ci = 0; ci < cin; ++ci) {
                                 const double* kr = &kv[k_off + ci * cout];
                                 if (gx) {
                                   double acc = 0.0;
                                   for (std::size_t c = 0; c < cout; ++c) acc += kr[c] * go[c];
                                   (*gx)[in_off + ci] += acc;
                                 }
                                 if (gk) {
                                   const double xin = xv[in_off + ci];
                                   double* gkr = &(*gk)[k_off + ci * cout];
                                   for (std::size_t c = 0; c < cout; ++c) gkr[c] += xin * go[c];
                                 }
                               }
                             }
                           }
                         }
                     });
}

Var spatial_mean(const Var& x) {
  const Shape& s = x.shape();
  if (s.size() != 3 || s[0] == 0 || s[1] == 0) throw DimensionError("spatial_mean expects [H×W×C], got " + to_string(s));
  const std::size_t hw = s[0] * s[1], C = s[2];
  Tensor out({C});
  for (std::size_t p = 0; p < hw; ++p)
    for (std::size_t c = 0; c < C; ++c) out[c] += x.value()[p * C + c];
  const double inv = 1.0 / static_cast<double>(hw);
  for (double& v : out.data()) v *= inv;
  return make_result("spatial_mean", std::move(out), {x}, [hw, C, inv](Node& self) {
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < C; ++c) (*g)[p * C + c] += inv * self.grad[c];
  });
}

Var hamilton(const Var& a, const Var& b) {
  require_same(a, b, "hamilton");
  if (a.shape().empty() || a.shape().back() != 4) throw DimensionError("hamilton: not quaternion " + to_string(a.shape()));
  const std::size_t count = a.value().size() / 4;
  Tensor out(a.shape());
  for (std::size_t q = 0; q < count; ++q)
    kernels::hamilton_acc(&a.value()[4 * q], &b.value()[4 * q], &out[4 * q]);
  return make_result("hamilton", std::move(out), {a, b}, [count](Node& self) {
    const Tensor& av = value_of(self, 0);
    const Tensor& bv = value_of(self, 1);
    if (Tensor* g = grad_of(self, 0))
      for (std::size_t q = 0; q < count; ++q) kernels::hamilton_acc_conj_b(&self.grad[4 * q], &bv[4 * q], &(*g)[4 * q]);
    if (Tensor* g = grad_of(self, 1))
      for (std::size_t q = 0; q < count; ++q) kernels::hamilton_acc_conj_a(&av[4 * q], &self.grad[4 * q], &(*g)[4 * q]);
  });
}

Var quat_matmul(const Var& a, const Var& b) {
  require_quat(a, 2, "quat_matmul");
  require_quat(b, 2, "quat_matmul");
  const std::size_t m = a.shape()[0], n = a.shape()[1], p = b.shape()[1];
  if (b.shape()[0] != n) {
    throw DimensionError("quat_matmul shape mismatch " + to_string(a.shape()) + " · " + to_string(b.shape()));
  }
  Tensor out({m, p, 4});
  kernels::quat_matmul_acc(a.value().data(), b.value().data(), out.data(), m, n, p);
  return make_result("quat_matmul", std::move(out), {a, b}, [m, n, p](Node& self) {
    if (Tensor* g = grad_of(self, 0))
      kernels::quat_matmul_grad_a(self.grad.data(), value_of(self, 1).data(), g->data(), m, n, p);
    if (Tensor* g = grad_of(self, 1))
      kernels::quat_matmul_grad_b(value_of(self, 0).data(), self.grad.data(), g->data(), m, n, p);
  });
}

Var quat_linear(const Var& x, const Var& w, const Var& b) {
  require_quat(x, 2, "quat_linear input");
  require_quat(w, 2, "quat_linear weight");
  const std::size_t T = x.shape()[0], din = x.shape()[1], dout = w.shape()[1];
  if (w.shape()[0] != din) {
    throw DimensionError("quat_linear: input " + to_string(x.shape()) + " vs weight " + to_string(w.shape()));
  }
  if (b && b.shape() != Shape{dout, 4}) {
    throw DimensionError("quat_linear: bias " + to_string(b.shape()) + " vs weight " + to_string(w.shape()));
  }
  Tensor out({T, dout, 4});
  const auto xv = x.value().data();
  const auto wv = w.value().data();
  for (std::size_t t = 0; t < T; ++t) {
    double* o = &out[4 * t * dout];
    if (b) std::copy(b.value().data().begin(), b.value().data().end(), o);
    for (std::size_t d = 0; d < din; ++d) {
      const double* xq = &xv[4 * (t * din + d)];
      const double* wr = &wv[4 * d * dout];
      for (std::size_t c = 0; c < dout; ++c) kernels::hamilton_acc(wr + 4 * c, xq, o + 4 * c);
    }
  }
  std::vector<Var> inputs{x, w};
  if (b) inputs.push_back(b);
  return make_result("quat_linear", std::move(out), std::move(inputs),
                     [T, din, dout, has_bias = static_cast<bool>(b)](Node& self) {
                       const auto xv = value_of(self, 0).data();
                       const auto wv = value_of(self, 1).data();
                       Tensor* gx = grad_of(self, 0);
                       Tensor* gw = grad_of(self, 1);
                       Tensor* gb = has_bias ? grad_of(self, 2) : nullptr;
                       for (std::size_t t = 0; t < T; ++t) {
                         const double* go = &self.grad[4 * t * dout];
                         if (gb)
                           for (std::size_t n = 0; n < 4 * dout; ++n) (*gb)[n] += go[n];
                         for (std::size_t d = 0; d < din; ++d) {
                           const double* xq = &xv[4 * (t * din + d)];
                           const double* wr = &wv[4 * d * dout];
                           for (std::size_t c = 0; c < dout; ++c) {
                             if (gx) kernels::hamilton_acc_conj_a(wr + 4 * c, go + 4 * c, &(*gx)[4 * (t * din + d)]);
                             if (gw) kernels::hamilton_acc_conj_b(go + 4 * c, xq, &(*gw)[4 * (d * dout + c)]);
                           }
                         }
                       }
                     });
}

Var quat_conv2d(const Var& x, const Var& kernel, const Var& b, std::size_t stride, std::size_t padding) {
  require_quat(x, 3, "quat_conv2d input");
  require_quat(kernel, 4, "quat_conv2d kernel");
  const Shape& xs = x.shape();
  const Shape& ks = kernel.shape();
  if (ks[2] != xs[2]) throw DimensionError("quat_conv2d: input " + to_string(xs) + " vs kernel " + to_string(ks));
  const std::size_t H = xs[0], W = xs[1], cin = xs[2], kh = ks[0], kw = ks[1], cout = ks[3];
  if (b && b.shape() != Shape{cout, 4}) throw DimensionError("quat_conv2d bias " + to_string(b.shape()));
  const std::size_t OH = conv_out_extent(H, kh, stride, padding);
  const std::size_t OW = conv_out_extent(W, kw, stride, padding);
  Tensor out({OH, OW, cout, 4});
  const auto xv = x.value().data();
  const auto kv = kernel.value().data();
  auto for_each_tap = [=](std::size_t oy, std::size_t ox, auto&& fn) {
    for (std::size_t u = 0; u < kh; ++u) {
      const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + u) - static_cast<std::ptrdiff_t>(padding);
      if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
      for (std::size_t v = 0; v < kw; ++v) {
        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + v) - static_cast<std::ptrdiff_t>(padding);
        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
        fn((static_cast<std::size_t>(iy) * W + static_cast<std::size_t>(ix)) * cin, (u * kw + v) * cin * cout);
      }
    }
  };
  for (std::size_t oy = 0; oy < OH; ++oy)
    for (std::size_t ox = 0; ox < OW; ++ox) {
      double* o = &out[4 * (oy * OW + ox) * cout];
      if (b) std::copy(b.value().data().begin(), b.value().data().end(), o);
      for_each_tap(oy, ox, [&](std::size_t in_off, std::size_t k_off) {
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double* xq = &xv[4 * (in_off + ci)];
          const double* kr = &kv[4 * (k_off + ci * cout)];
          for (std::size_t c = 0; c < cout; ++c) kernels::hamilton_acc(kr + 4 * c, xq, o + 4 * c);
        }
      });
    }
  std::vector<Var> inputs{x, kernel};
  if (b) inputs.push_back(b);
  return make_result("quat_conv2d", std::move(out), std::move(inputs),
                     [=, has_bias = static_cast<bool>(b)](Node& self) {
                       const auto xv = value_of(self, 0).data();
                       const auto kv = value_of(self, 1).data();
                       Tensor* gx = grad_of(self, 0);
                       Tensor* gk = grad_of(self, 1);
                       Tensor* gb = has_bias ? grad_of(self, 2) : nullptr;
                       for (std::size_t oy = 0; oy < OH; ++oy)
                         for (std::size_t ox = 0; ox < OW; ++ox) {
                           const double* go = &self.grad[4 * (oy * OW + ox) * cout];
                           if (gb)
                             for (std::size_t n = 0; n < 4 * cout; ++n) (*gb)[n] += go[n];
                           for_each_tap(oy, ox, [&](std::size_t in_off, std::size_t k_off) {
                             for (std::size_t ci = 0; ci < cin; ++ci) {
                               const double* xq = &xv[4 * (in_off + ci)];
                               const double* kr = &kv[4 * (k_off + ci * cout)];
                               for (std::size_t c = 0; c < cout; ++c) {
                                 if (gx) kernels::hamilton_acc_conj_a(kr + 4 * c, go + 4 * c, &(*gx)[4 * (in_off + ci)]);
                                 if (gk) kernels::hamilton_acc_conj_b(go + 4 * c, xq, &(*gk)[4 * (k_off + ci * cout + c)]);
                               }
                             }
                           });
                         }
                     });
}

Var cross_entropy(const Var& logits, std::span<const int> labels) {
  const Shape& s = logits.shape();
  if (s.size() != 2 || s[0] != labels.size() || s[1] == 0) {
    throw DimensionError("cross_entropy: logits " + to_string(s) + " vs " + std::to_string(labels.size()) + " labels");
  }
  const std::size_t B = s[0], K = s[1];
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= K) {
      throw ContractError("cross_entropy: label " + std::to_string(l) + " outside [0, " + std::to_string(K) + ")");
    }
  }
  Tensor probs = logits.value();
  kernels::softmax_strided(probs.data(), B, K, 1);
  double loss = 0.0;
  for (std::size_t r = 0; r < B; ++r) {
    const double* z = &logits.value()[r * K];
    const double peak = *std::max_element(z, z + K);
    double total = 0.0;
    for (std::size_t c = 0; c < K; ++c) total += std::exp(z[c] - peak);
    loss += peak + std::log(total) - z[labels[r]];
  }
  loss /= static_cast<double>(B);
  std::vector<int> owned(labels.begin(), labels.end());
  return make_result("cross_entropy", Tensor::scalar(loss), {logits},
                     [B, K, probs = std::move(probs), owned = std::move(owned)](Node& self) {
                       Tensor* g = grad_of(self, 0);
                       if (!g) return;
                       const double scale = self.grad[0] / static_cast<double>(B);
                       for (std::size_t r = 0; r < B; ++r)
                         for (std::size_t c = 0; c < K; ++c) {
                           const double target = static_cast<int>(c) == owned[r] ? 1.0 : 0.0;
                           (*g)[r * K + c] += scale * (probs[r * K + c] - target);
                         }
                     });
}

Var orthogonal_loss(const Var& v1, const Var& v2, const Var& v3) {
  require_same(v1, v2, "orthogonal_loss");
  require_same(v1, v3, "orthogonal_loss");
  const std::array<const Tensor*, 3> v{&v1.value(), &v2.value(), &v3.value()};
  const std::size_t D = v1.value().size();
  std::array<double, 3> norm{};
  for (std::size_t a = 0; a < 3; ++a) {
    double sq = 0.0;
    for (std::size_t n = 0; n < D; ++n) sq += (*v[a])[n] * (*v[a])[n];
    norm[a] = std::sqrt(sq);
    if (!(norm[a] > 0.0)) {
      throw DegenerateInputError("orthogonal_loss: vector v" + std::to_string(a + 1) + " has zero L2 norm");
    }
  }
  constexpr std::array<std::pair<std::size_t, std::size_t>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  std::array<double, 3> cosine{};
  double loss = 0.0;
  for (std::size_t p = 0; p < 3; ++p) {
    const auto [a, b] = pairs[p];
    double dot = 0.0;
    for (std::size_t n = 0; n < D; ++n) dot += (*v[a])[n] * (*v[b])[n];
    cosine[p] = dot / (norm[a] * norm[b]);
    loss += std::abs(cosine[p]);
  }
  loss /= 3.0;
  return make_result("orthogonal_loss", Tensor::scalar(loss), {v1, v2, v3}, [D, norm, cosine, pairs](Node& self) {
    for (std::size_t p = 0; p < 3; ++p) {
      const auto [a, b] = pairs[p];
      const double sign = cosine[p] > 0.0 ? 1.0 : (cosine[p] < 0.0 ? -1.0 : 0.0);
      const double w = self.grad[0] * sign / 3.0;
      if (w == 0.0) continue;
      const Tensor& va = value_of(self, a);
      const Tensor& vb = value_of(self, b);
      if (Tensor* g = grad_of(self, a))
        for (std::size_t n = 0; n < D; ++n)
          (*g)[n] += w * (vb[n] / (norm[a] * norm[b]) - cosine[p] * va[n] / (norm[a] * norm[a]));
      if (Tensor* g = grad_of(self, b))
        for (std::size_t n = 0; n < D; ++n)
          (*g)[n] += w * (va[n] / (norm[a] * norm[b]) - cosine[p] * vb[n] / (norm[b] * norm[b]));
    }
  });
}

}  // namespace qot::ag
