#include "imoc/tensor.hpp"

#include <Eigen/Core>

#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace imoc {

namespace {
Precision g_precision = Precision::f64;
bool g_grad_enabled = true;
std::vector<double> g_zero_grad_scratch;
}  // namespace

Precision compute_precision() { return g_precision; }
void set_compute_precision(Precision p) { g_precision = p; }

double quantize(double v) {
  return g_precision == Precision::f32 ? static_cast<double>(static_cast<float>(v)) : v;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : saved_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = saved_; }

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  auto n = std::make_shared<detail::Node>();
  n->value.assign(shape_numel(shape), quantize(v));
  n->shape = std::move(shape);
  n->requires_grad = requires_grad && g_grad_enabled;
  return Tensor(std::move(n));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size())
    throw std::invalid_argument("tensor: shape " + shape_str(shape) + " wants " +
                                std::to_string(shape_numel(shape)) + " values, got " +
                                std::to_string(data.size()));
  auto n = std::make_shared<detail::Node>();
  for (auto& v : data) v = quantize(v);
  n->value = std::move(data);
  n->shape = std::move(shape);
  n->requires_grad = requires_grad && g_grad_enabled;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_data(Shape{}, {v}, requires_grad);
}

std::span<const double> Tensor::grad() const {
  if (node_->grad.size() == node_->value.size()) return node_->grad;
  if (g_zero_grad_scratch.size() < node_->value.size())
    g_zero_grad_scratch.assign(node_->value.size(), 0.0);
  return {g_zero_grad_scratch.data(), node_->value.size()};
}

double Tensor::item() const {
  if (size() != 1)
    throw std::invalid_argument("tensor: item() on non-scalar shape " + shape_str(shape()));
  return node_->value[0];
}

Tensor Tensor::detach() const {
  auto n = std::make_shared<detail::Node>();
  n->shape = node_->shape;
  n->value = node_->value;
  n->requires_grad = false;
  return Tensor(std::move(n));
}

void backward(const Tensor& root) {
  if (root.size() != 1)
    throw std::invalid_argument("backward: root must be scalar, got shape " +
                                shape_str(root.shape()));
  // Iterative postorder DFS; children before parents in `order`.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  struct Frame {
    detail::Node* n;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.node().get(), 0});
  seen.insert(root.node().get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.n->parents.size()) {
      detail::Node* p = f.n->parents[f.next_parent++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }
  for (auto* n : order) n->grad.assign(n->value.size(), 0.0);
  root.node()->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
          bool accumulate, bool transpose_b) {
  using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Idx = Eigen::Index;
  const Idx bm = transpose_b ? static_cast<Idx>(n) : static_cast<Idx>(k);
  const Idx bn = transpose_b ? static_cast<Idx>(k) : static_cast<Idx>(n);
  if (g_precision == Precision::f64) {
    Eigen::Map<const MatD> A(a, static_cast<Idx>(m), static_cast<Idx>(k));
    Eigen::Map<const MatD> B(b, bm, bn);
    Eigen::Map<MatD> C(c, static_cast<Idx>(m), static_cast<Idx>(n));
    if (transpose_b) {
      if (accumulate)
        C.noalias() += A * B.transpose();
      else
        C.noalias() = A * B.transpose();
    } else {
      if (accumulate)
        C.noalias() += A * B;
      else
        C.noalias() = A * B;
    }
    return;
  }
  // 32-bit mode: convert operands once, multiply in float, round back.
  thread_local MatF fa, fb, fc;
  fa = Eigen::Map<const MatD>(a, static_cast<Idx>(m), static_cast<Idx>(k)).cast<float>();
  fb = Eigen::Map<const MatD>(b, bm, bn).cast<float>();
  if (transpose_b)
    fc.noalias() = fa * fb.transpose();
  else
    fc.noalias() = fa * fb;
  const std::size_t total = m * n;
  const float* src = fc.data();
  if (accumulate) {
    for (std::size_t i = 0; i < total; ++i)
      c[i] = quantize(c[i] + static_cast<double>(src[i]));
  } else {
    for (std::size_t i = 0; i < total; ++i) c[i] = static_cast<double>(src[i]);
  }
}

}  // namespace imoc
