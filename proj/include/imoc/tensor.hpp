#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace imoc {

// Engine-wide compute precision. 64-bit is the verification mode (finite
// differences are meaningless at 32-bit); 32-bit is for training throughput.
// In 32-bit mode every op output is rounded to the float grid and the GEMM
// kernels run in float.
enum class Precision { f32 = 32, f64 = 64 };

Precision compute_precision();
void set_compute_precision(Precision p);

double quantize(double v);

// Scoped precision override.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(Precision p) : saved_(compute_precision()) { set_compute_precision(p); }
  ~PrecisionGuard() { set_compute_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  Precision saved_;
};

// While active, newly built ops do not record backward closures.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool saved_;
};

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated lazily during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Accumulates this node's grad into its parents' grads.
  std::function<void(Node&)> backward;
  const char* op = "leaf";

  std::size_t size() const { return value.size(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

// Value-semantics handle to a graph node. Cheap to copy; the graph is a DAG
// of shared_ptr nodes freed when the last handle goes away.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->size(); }
  std::size_t rank() const { return node_->shape.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> values() const { return node_->value; }
  // Gradient of the last backward() pass; zeros for an unreached leaf.
  std::span<const double> grad() const;
  double item() const;

  // Direct mutation is for leaves only (parameter init / optimizer steps);
  // nodes already consumed by an op must not be written.
  std::span<double> raw_values() { return node_->value; }
  void zero_grad() { node_->grad.clear(); }

  // Copy of the values as a fresh non-differentiable leaf.
  Tensor detach() const;

  std::shared_ptr<detail::Node> node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Reverse-mode sweep from a scalar root. Every requires_grad leaf reachable
// from root receives its partial derivative; unreached leaves read as zero.
void backward(const Tensor& root);

// C (m x n) += / = A (m x k) . B (k x n), row-major. Honors compute_precision.
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
          bool accumulate = false, bool transpose_b = false);

}  // namespace imoc
