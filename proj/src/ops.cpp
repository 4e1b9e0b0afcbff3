#include "imoc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace imoc::ops {

namespace {

using detail::Node;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

// Builds a node; backward closures are recorded only when some parent needs
// gradients and grad mode is on.
Tensor make(Shape shape, std::vector<double> value, std::vector<Tensor> parents, const char* op,
            std::function<void(Node&)> bwd) {
  for (auto& v : value) v = quantize(v);
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->op = op;
  bool rg = false;
  if (grad_enabled())
    for (const auto& p : parents) rg = rg || p.requires_grad();
  n->requires_grad = rg;
  if (rg) {
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(bwd);
  }
  return Tensor(std::move(n));
}

// Gradient sink for parent `i` of `self`; null when that parent is constant.
double* grad_of(Node& self, std::size_t i) {
  Node* p = self.parents[i].get();
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  return p->grad.data();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                      " vs " + shape_str(b.shape()));
}

std::pair<std::size_t, std::size_t> rows_cols_last(const Tensor& x, const char* op) {
  require(x.rank() >= 1, std::string(op) + ": needs rank >= 1, got " + shape_str(x.shape()));
  std::size_t cols = x.shape().back();
  require(cols >= 1, std::string(op) + ": empty last axis");
  return {x.size() / cols, cols};
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make(a.shape(), std::move(out), {a, b}, "add", [](Node& self) {
    double* ga = grad_of(self, 0);
    double* gb = grad_of(self, 1);
    for (std::size_t i = 0; i < self.size(); ++i) {
      if (ga) ga[i] += self.grad[i];
      if (gb) gb[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make(a.shape(), std::move(out), {a, b}, "sub", [](Node& self) {
    double* ga = grad_of(self, 0);
    double* gb = grad_of(self, 1);
    for (std::size_t i = 0; i < self.size(); ++i) {
      if (ga) ga[i] += self.grad[i];
      if (gb) gb[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make(a.shape(), std::move(out), {a, b}, "mul", [](Node& self) {
    double* ga = grad_of(self, 0);
    double* gb = grad_of(self, 1);
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    for (std::size_t i = 0; i < self.size(); ++i) {
      if (ga) ga[i] += self.grad[i] * bv[i];
      if (gb) gb[i] += self.grad[i] * av[i];
    }
  });
}

Tensor add_scalar(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + c;
  return make(a.shape(), std::move(out), {a}, "add_scalar", [](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < self.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor mul_scalar(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * c;
  return make(a.shape(), std::move(out), {a}, "mul_scalar", [c](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < self.size(); ++i) g[i] += self.grad[i] * c;
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return make(x.shape(), std::move(out), {x}, "relu", [](Node& self) {
    if (double* g = grad_of(self, 0)) {
      const auto& xv = self.parents[0]->value;
      for (std::size_t i = 0; i < self.size(); ++i)
        if (xv[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor tanh(const Tensor& x) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  return make(x.shape(), std::move(out), {x}, "tanh", [](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.size(); ++i) {
        double y = self.value[i];
        g[i] += self.grad[i] * (1.0 - y * y);
      }
    }
  });
}

Tensor softplus(const Tensor& x) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = xv[i];
    out[i] = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
  }
  return make(x.shape(), std::move(out), {x}, "softplus", [](Node& self) {
    if (double* g = grad_of(self, 0)) {
      const auto& xv = self.parents[0]->value;
      for (std::size_t i = 0; i < self.size(); ++i)
        g[i] += self.grad[i] / (1.0 + std::exp(-xv[i]));
    }
  });
}

Tensor exp(const Tensor& x) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(xv[i]);
  return make(x.shape(), std::move(out), {x}, "exp", [](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < self.size(); ++i) g[i] += self.grad[i] * self.value[i];
  });
}

Tensor log(const Tensor& x) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    require(xv[i] > 0.0, "log: non-positive input " + std::to_string(xv[i]) + " at flat index " +
                             std::to_string(i));
    out[i] = std::log(xv[i]);
  }
  return make(x.shape(), std::move(out), {x}, "log", [](Node& self) {
    if (double* g = grad_of(self, 0)) {
      const auto& xv = self.parents[0]->value;
      for (std::size_t i = 0; i < self.size(); ++i) g[i] += self.grad[i] / xv[i];
    }
  });
}

namespace {
void transpose_copy(const double* src, std::size_t rows, std::size_t cols, std::vector<double>& dst) {
  dst.resize(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}
}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2,
          "matmul: needs 2-D operands, got " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  require(b.shape()[0] == k,
          "matmul: inner dims differ, " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  std::vector<double> out(m * n);
  gemm(m, k, n, a.values().data(), b.values().data(), out.data());
  return make({m, n}, std::move(out), {a, b}, "matmul", [m, k, n](Node& self) {
    double* ga = grad_of(self, 0);
    double* gb = grad_of(self, 1);
    const double* g = self.grad.data();
    const double* av = self.parents[0]->value.data();
    const double* bv = self.parents[1]->value.data();
    if (ga) gemm(m, n, k, g, bv, ga, /*accumulate=*/true, /*transpose_b=*/true);  // g . b^T
    if (gb) {
      std::vector<double> at;
      transpose_copy(av, m, k, at);
      gemm(k, m, n, at.data(), g, gb, /*accumulate=*/true);  // a^T . g
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2, "matmul_nt: needs 2-D operands, got " +
                                              shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  require(b.shape()[1] == k,
          "matmul_nt: inner dims differ, " + shape_str(a.shape()) + " x " + shape_str(b.shape()) +
              "^T");
  std::vector<double> out(m * n);
  gemm(m, k, n, a.values().data(), b.values().data(), out.data(), false, /*transpose_b=*/true);
  return make({m, n}, std::move(out), {a, b}, "matmul_nt", [m, k, n](Node& self) {
    double* ga = grad_of(self, 0);
    double* gb = grad_of(self, 1);
    const double* g = self.grad.data();
    const double* av = self.parents[0]->value.data();
    const double* bv = self.parents[1]->value.data();
    if (ga) gemm(m, n, k, g, bv, ga, /*accumulate=*/true);  // g . b
    if (gb) {
      std::vector<double> gt;
      transpose_copy(g, m, n, gt);
      gemm(n, m, k, gt.data(), av, gb, /*accumulate=*/true);  // g^T . a
    }
  });
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  require(m.rank() == 2 && v.rank() == 1 && v.shape()[0] == m.shape()[1],
          "add_rowvec: shapes " + shape_str(m.shape()) + " + " + shape_str(v.shape()));
  const std::size_t r = m.shape()[0], c = m.shape()[1];
  std::vector<double> out(m.size());
  auto mv = m.values(), vv = v.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = mv[i * c + j] + vv[j];
  return make(m.shape(), std::move(out), {m, v}, "add_rowvec", [r, c](Node& self) {
    double* gm = grad_of(self, 0);
    double* gv = grad_of(self, 1);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        if (gm) gm[i * c + j] += self.grad[i * c + j];
        if (gv) gv[j] += self.grad[i * c + j];
      }
  });
}

namespace {

struct ConvDims {
  std::size_t n, c, h, w, o, kh, kw, oh, ow, stride, pad;
  std::size_t k() const { return c * kh * kw; }
};

// col (c*kh*kw) x (oh*ow) for one image.
void im2col(const double* x, const ConvDims& d, double* col) {
  const std::size_t ohw = d.oh * d.ow;
  for (std::size_t ch = 0; ch < d.c; ++ch) {
    const double* xc = x + ch * d.h * d.w;
    for (std::size_t ki = 0; ki < d.kh; ++ki)
      for (std::size_t kj = 0; kj < d.kw; ++kj) {
        double* row = col + ((ch * d.kh + ki) * d.kw + kj) * ohw;
        for (std::size_t oi = 0; oi < d.oh; ++oi) {
          const long ii = static_cast<long>(oi * d.stride + ki) - static_cast<long>(d.pad);
          if (ii < 0 || ii >= static_cast<long>(d.h)) {
            std::fill(row + oi * d.ow, row + (oi + 1) * d.ow, 0.0);
            continue;
          }
          const double* xrow = xc + static_cast<std::size_t>(ii) * d.w;
          for (std::size_t oj = 0; oj < d.ow; ++oj) {
            const long jj = static_cast<long>(oj * d.stride + kj) - static_cast<long>(d.pad);
            row[oi * d.ow + oj] =
                (jj < 0 || jj >= static_cast<long>(d.w)) ? 0.0 : xrow[static_cast<std::size_t>(jj)];
          }
        }
      }
  }
}

void col2im_add(const double* col, const ConvDims& d, double* gx) {
  const std::size_t ohw = d.oh * d.ow;
  for (std::size_t ch = 0; ch < d.c; ++ch) {
    double* xc = gx + ch * d.h * d.w;
    for (std::size_t ki = 0; ki < d.kh; ++ki)
      for (std::size_t kj = 0; kj < d.kw; ++kj) {
        const double* row = col + ((ch * d.kh + ki) * d.kw + kj) * ohw;
        for (std::size_t oi = 0; oi < d.oh; ++oi) {
          const long ii = static_cast<long>(oi * d.stride + ki) - static_cast<long>(d.pad);
          if (ii < 0 || ii >= static_cast<long>(d.h)) continue;
          double* xrow = xc + static_cast<std::size_t>(ii) * d.w;
          for (std::size_t oj = 0; oj < d.ow; ++oj) {
            const long jj = static_cast<long>(oj * d.stride + kj) - static_cast<long>(d.pad);
            if (jj >= 0 && jj < static_cast<long>(d.w))
              xrow[static_cast<std::size_t>(jj)] += row[oi * d.ow + oj];
          }
        }
      }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
              std::size_t pad, const char* label) {
  require(x.rank() == 4, std::string(label) + ": input must be NCHW, got " + shape_str(x.shape()));
  require(w.rank() == 4, std::string(label) + ": weight must be OCKK, got " + shape_str(w.shape()));
  ConvDims d;
  d.n = x.shape()[0];
  d.c = x.shape()[1];
  d.h = x.shape()[2];
  d.w = x.shape()[3];
  d.o = w.shape()[0];
  d.kh = w.shape()[2];
  d.kw = w.shape()[3];
  d.stride = stride;
  d.pad = pad;
  require(stride >= 1, std::string(label) + ": stride must be >= 1");
  require(w.shape()[1] == d.c, std::string(label) + ": channel mismatch, input " +
                                   shape_str(x.shape()) + " vs weight " + shape_str(w.shape()));
  require(b.rank() == 1 && b.shape()[0] == d.o,
          std::string(label) + ": bias shape " + shape_str(b.shape()) + " wants [" +
              std::to_string(d.o) + "]");
  require(d.h + 2 * pad >= d.kh && d.w + 2 * pad >= d.kw,
          std::string(label) + ": input " + shape_str(x.shape()) + " too small for kernel " +
              std::to_string(d.kh) + "x" + std::to_string(d.kw) + " stride " +
              std::to_string(stride) + " pad " + std::to_string(pad));
  d.oh = (d.h + 2 * pad - d.kh) / stride + 1;
  d.ow = (d.w + 2 * pad - d.kw) / stride + 1;

  const std::size_t ohw = d.oh * d.ow, K = d.k();
  std::vector<double> out(d.n * d.o * ohw);
  {
    thread_local std::vector<double> col;
    col.resize(K * ohw);
    auto xv = x.values();
    auto wv = w.values();
    auto bv = b.values();
    for (std::size_t img = 0; img < d.n; ++img) {
      im2col(xv.data() + img * d.c * d.h * d.w, d, col.data());
      double* o = out.data() + img * d.o * ohw;
      gemm(d.o, K, ohw, wv.data(), col.data(), o);
      for (std::size_t ch = 0; ch < d.o; ++ch)
        for (std::size_t p = 0; p < ohw; ++p) o[ch * ohw + p] = quantize(o[ch * ohw + p] + bv[ch]);
    }
  }
  return make({d.n, d.o, d.oh, d.ow}, std::move(out), {x, w, b}, "conv2d", [d](Node& self) {
    const std::size_t ohw = d.oh * d.ow, K = d.k();
    double* gx = grad_of(self, 0);
    double* gw = grad_of(self, 1);
    double* gb = grad_of(self, 2);
    const double* g = self.grad.data();
    const double* xv = self.parents[0]->value.data();
    const double* wv = self.parents[1]->value.data();
    if (gb) {
      for (std::size_t img = 0; img < d.n; ++img)
        for (std::size_t ch = 0; ch < d.o; ++ch) {
          double s = 0.0;
          const double* go = g + (img * d.o + ch) * ohw;
          for (std::size_t p = 0; p < ohw; ++p) s += go[p];
          gb[ch] += s;
        }
    }
    thread_local std::vector<double> col, wt, dcol;
    if (gx) {
      wt.resize(K * d.o);
      transpose_copy(wv, d.o, K, wt);
      dcol.resize(K * ohw);
    }
    if (gw || gx) col.resize(K * ohw);
    for (std::size_t img = 0; img < d.n; ++img) {
      const double* go = g + img * d.o * ohw;
      if (gw || gx) im2col(xv + img * d.c * d.h * d.w, d, col.data());
      if (gw) gemm(d.o, ohw, K, go, col.data(), gw, /*accumulate=*/true, /*transpose_b=*/true);
      if (gx) {
        gemm(K, d.o, ohw, wt.data(), go, dcol.data());
        col2im_add(dcol.data(), d, gx + img * d.c * d.h * d.w);
      }
    }
  });
}

Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make({}, {s}, {x}, "sum_all", [](Node& self) {
    if (double* g = grad_of(self, 0)) {
      const double gr = self.grad[0];
      for (std::size_t i = 0; i < self.parents[0]->size(); ++i) g[i] += gr;
    }
  });
}

Tensor mean_all(const Tensor& x) {
  require(x.size() > 0, "mean_all: empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  const double inv = 1.0 / static_cast<double>(x.size());
  return make({}, {s * inv}, {x}, "mean_all", [inv](Node& self) {
    if (double* g = grad_of(self, 0)) {
      const double gr = self.grad[0] * inv;
      for (std::size_t i = 0; i < self.parents[0]->size(); ++i) g[i] += gr;
    }
  });
}

namespace {
Shape drop_last(const Shape& s) { return Shape(s.begin(), s.end() - 1); }
}  // namespace

Tensor sum_last_axis(const Tensor& x) {
  auto [rows, cols] = rows_cols_last(x, "sum_last_axis");
  std::vector<double> out(rows, 0.0);
  auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += xv[r * cols + c];
    out[r] = s;
  }
  return make(drop_last(x.shape()), std::move(out), {x}, "sum_last_axis", [cols = cols](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t r = 0; r < self.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += self.grad[r];
    }
  });
}

Tensor logsumexp_last_axis(const Tensor& x) {
  auto [rows, cols] = rows_cols_last(x, "logsumexp_last_axis");
  std::vector<double> out(rows);
  auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * cols;
    double m = row[0];
    for (std::size_t c = 1; c < cols; ++c) m = std::max(m, row[c]);
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += std::exp(row[c] - m);
    out[r] = m + std::log(s);
  }
  return make(drop_last(x.shape()), std::move(out), {x}, "logsumexp_last_axis",
              [cols = cols](Node& self) {
                if (double* g = grad_of(self, 0)) {
                  const auto& xv = self.parents[0]->value;
                  for (std::size_t r = 0; r < self.size(); ++r)
                    for (std::size_t c = 0; c < cols; ++c)
                      g[r * cols + c] += self.grad[r] * std::exp(xv[r * cols + c] - self.value[r]);
                }
              });
}

Tensor logsumexp_excl_diag(const Tensor& s) {
  require(s.rank() == 2 && s.shape()[0] == s.shape()[1] && s.shape()[0] >= 2,
          "logsumexp_excl_diag: needs square matrix of order >= 2, got " + shape_str(s.shape()));
  const std::size_t n = s.shape()[0];
  std::vector<double> out(n);
  auto sv = s.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = sv.data() + i * n;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) m = std::max(m, row[k]);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) acc += std::exp(row[k] - m);
    out[i] = m + std::log(acc);
  }
  return make({n}, std::move(out), {s}, "logsumexp_excl_diag", [n](Node& self) {
    if (double* g = grad_of(self, 0)) {
      const auto& sv = self.parents[0]->value;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
          if (k != i) g[i * n + k] += self.grad[i] * std::exp(sv[i * n + k] - self.value[i]);
    }
  });
}

Tensor pnorm_rows(const Tensor& x, int p) {
  require(p == 1 || p == 2, "pnorm_rows: p must be 1 or 2, got " + std::to_string(p));
  auto [rows, cols] = rows_cols_last(x, "pnorm_rows");
  std::vector<double> out(rows);
  auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double v = xv[r * cols + c];
      s += (p == 1) ? std::abs(v) : v * v;
    }
    out[r] = (p == 1) ? s : std::sqrt(s);
  }
  return make(drop_last(x.shape()), std::move(out), {x}, "pnorm_rows",
              [cols = cols, p](Node& self) {
                if (double* g = grad_of(self, 0)) {
                  const auto& xv = self.parents[0]->value;
                  for (std::size_t r = 0; r < self.size(); ++r) {
                    for (std::size_t c = 0; c < cols; ++c) {
                      double v = xv[r * cols + c];
                      if (p == 1) {
                        g[r * cols + c] += self.grad[r] * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
                      } else if (self.value[r] > 0.0) {
                        g[r * cols + c] += self.grad[r] * v / self.value[r];
                      }
                    }
                  }
                }
              });
}

Tensor sql2_rows(const Tensor& x) {
  auto [rows, cols] = rows_cols_last(x, "sql2_rows");
  std::vector<double> out(rows);
  auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double v = xv[r * cols + c];
      s += v * v;
    }
    out[r] = s;
  }
  return make(drop_last(x.shape()), std::move(out), {x}, "sql2_rows", [cols = cols](Node& self) {
    if (double* g = grad_of(self, 0)) {
      const auto& xv = self.parents[0]->value;
      for (std::size_t r = 0; r < self.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
          g[r * cols + c] += self.grad[r] * 2.0 * xv[r * cols + c];
    }
  });
}

Tensor reshape(const Tensor& x, Shape new_shape) {
  require(shape_numel(new_shape) == x.size(), "reshape: " + shape_str(x.shape()) + " to " +
                                                  shape_str(new_shape) + " changes element count");
  std::vector<double> out(x.values().begin(), x.values().end());
  return make(std::move(new_shape), std::move(out), {x}, "reshape", [](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < self.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor interleave_rows(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.shape() == b.shape(),
          "interleave_rows: shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t n = a.shape()[0], d = a.shape()[1];
  std::vector<double> out(2 * n * d);
  auto av = a.values(), bv = b.values();
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(av.data() + r * d, d, out.data() + (2 * r) * d);
    std::copy_n(bv.data() + r * d, d, out.data() + (2 * r + 1) * d);
  }
  return make({2 * n, d}, std::move(out), {a, b}, "interleave_rows", [n, d](Node& self) {
    double* ga = grad_of(self, 0);
    double* gb = grad_of(self, 1);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        if (ga) ga[r * d + c] += self.grad[(2 * r) * d + c];
        if (gb) gb[r * d + c] += self.grad[(2 * r + 1) * d + c];
      }
  });
}

Tensor stride_rows(const Tensor& x, std::size_t start, std::size_t step) {
  require(x.rank() == 2, "stride_rows: needs 2-D input, got " + shape_str(x.shape()));
  require(step >= 1 && start < x.shape()[0], "stride_rows: start/step out of range");
  const std::size_t rows = x.shape()[0], d = x.shape()[1];
  const std::size_t n = (rows - start + step - 1) / step;
  std::vector<double> out(n * d);
  auto xv = x.values();
  for (std::size_t r = 0; r < n; ++r)
    std::copy_n(xv.data() + (start + r * step) * d, d, out.data() + r * d);
  return make({n, d}, std::move(out), {x}, "stride_rows", [start, step, d, n](Node& self) {
    if (double* g = grad_of(self, 0)) {
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) g[(start + r * step) * d + c] += self.grad[r * d + c];
    }
  });
}

Tensor spatial_subsample(const Tensor& x, std::size_t stride_h, std::size_t stride_w,
                         std::size_t out_h, std::size_t out_w) {
  require(x.rank() == 4, "spatial_subsample: needs NCHW, got " + shape_str(x.shape()));
  const std::size_t n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
  require(out_h >= 1 && out_w >= 1 && (out_h - 1) * stride_h < h && (out_w - 1) * stride_w < w,
          "spatial_subsample: window " + std::to_string(out_h) + "x" + std::to_string(out_w) +
              " stride " + std::to_string(stride_h) + " exceeds input " + shape_str(x.shape()));
  std::vector<double> out(n * c * out_h * out_w);
  auto xv = x.values();
  for (std::size_t img = 0; img < n; ++img)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* src = xv.data() + (img * c + ch) * h * w;
      double* dst = out.data() + (img * c + ch) * out_h * out_w;
      for (std::size_t i = 0; i < out_h; ++i)
        for (std::size_t j = 0; j < out_w; ++j) dst[i * out_w + j] = src[i * stride_h * w + j * stride_w];
    }
  return make({n, c, out_h, out_w}, std::move(out), {x}, "spatial_subsample",
              [n, c, h, w, stride_h, stride_w, out_h, out_w](Node& self) {
                if (double* g = grad_of(self, 0)) {
                  for (std::size_t img = 0; img < n; ++img)
                    for (std::size_t ch = 0; ch < c; ++ch) {
                      double* dst = g + (img * c + ch) * h * w;
                      const double* src = self.grad.data() + (img * c + ch) * out_h * out_w;
                      for (std::size_t i = 0; i < out_h; ++i)
                        for (std::size_t j = 0; j < out_w; ++j)
                          dst[i * stride_h * w + j * stride_w] += src[i * out_w + j];
                    }
                }
              });
}

namespace {
void check_paired_square(const Tensor& s, const char* op) {
  require(s.rank() == 2 && s.shape()[0] == s.shape()[1] && s.shape()[0] >= 4 &&
              s.shape()[0] % 2 == 0,
          std::string(op) + ": needs even square matrix of order >= 4, got " +
              shape_str(s.shape()));
}
}  // namespace

Tensor sum_partner_entries(const Tensor& s) {
  check_paired_square(s, "sum_partner_entries");
  const std::size_t n = s.shape()[0];
  auto sv = s.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += sv[i * n + (i ^ 1)];
  return make({}, {acc}, {s}, "sum_partner_entries", [n](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < n; ++i) g[i * n + (i ^ 1)] += self.grad[0];
  });
}

Tensor partner_entries(const Tensor& s) {
  check_paired_square(s, "partner_entries");
  const std::size_t n = s.shape()[0];
  auto sv = s.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sv[i * n + (i ^ 1)];
  return make({n}, std::move(out), {s}, "partner_entries", [n](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < n; ++i) g[i * n + (i ^ 1)] += self.grad[i];
  });
}

Tensor offdiag_nonpartner_entries(const Tensor& s) {
  check_paired_square(s, "offdiag_nonpartner_entries");
  const std::size_t n = s.shape()[0];
  auto sv = s.values();
  std::vector<double> out;
  out.reserve(n * (n - 2));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && j != (i ^ 1)) out.push_back(sv[i * n + j]);
  return make({n * (n - 2)}, std::move(out), {s}, "offdiag_nonpartner_entries", [n](Node& self) {
    if (double* g = grad_of(self, 0)) {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (j != i && j != (i ^ 1)) g[i * n + j] += self.grad[idx++];
    }
  });
}

}  // namespace imoc::ops
