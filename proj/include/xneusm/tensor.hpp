#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace xneusm::ad {

struct Node;

/// Dense 2-D double tensor participating in a reverse-mode gradient tape.
/// The tape is implicit: every op records its parents and a backprop closure
/// on the produced node, and backward() walks the DAG from a scalar loss.
/// Values are row-major. Ops never produce NaN/Inf on finite inputs within
/// their documented domains.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor constant(int rows, int cols, std::vector<double> data);
  static Tensor param(int rows, int cols, std::vector<double> data);
  static Tensor scalar(double v);
  static Tensor filled(int rows, int cols, double v);

  bool defined() const { return node_ != nullptr; }
  int rows() const;
  int cols() const;
  std::size_t size() const;
  bool requires_grad() const;

  const std::vector<double>& value() const;
  std::vector<double>& raw_value();  // leaf tensors only (optimizer updates)
  const std::vector<double>& grad() const;
  void zero_grad();

  double at(int r, int c) const;
  double item() const;  // 1x1 tensors

  std::shared_ptr<Node> node() const { return node_; }
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<Node> node_;
};

struct Node {
  int rows = 0, cols = 0;
  std::vector<double> v;
  std::vector<double> g;  // sized lazily during backward
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  void ensure_grad();
};

// --- primitives -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);     // A·B
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // A·Bᵀ
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor div(const Tensor& a, const Tensor& b);  // elementwise
Tensor scalar_mul(double c, const Tensor& a);
Tensor add_broadcast_scalar(const Tensor& m, const Tensor& s);  // s is 1x1

/// Scales row i of m by v[i]; v has shape (rows, 1).
Tensor rowwise_scale(const Tensor& v, const Tensor& m);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor leaky_relu(const Tensor& a, double slope);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
/// log(max(x, eps)); the clamped region has zero gradient.
Tensor log_clamped(const Tensor& a, double eps = 1e-12);

/// Row-wise softmax over unmasked entries (mask is 0/1 and takes no
/// gradient); masked entries are zero in the output, and a fully masked row
/// yields an all-zero row.
Tensor masked_softmax_rows(const Tensor& e, const Tensor& mask);

/// Mean over the listed rows; result is 1 x cols.
Tensor mean_rows_subset(const Tensor& m, const std::vector<int>& rows);

Tensor sum_all(const Tensor& m);  // 1x1

/// Reverse-mode sweep from a (1,1) loss. Populates grad buffers of every
/// requires_grad ancestor, then releases the interior of the tape. Throws
/// Error(non_scalar_loss) for non-scalar input.
void backward(const Tensor& loss);

// --- finite-difference gradient checking ------------------------------------

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst;
  std::vector<GradCheckEntry> per_param;
  bool pass(double tol) const { return max_rel_err <= tol; }
};

/// Central-difference check of d f() / d params. `f` must be deterministic
/// and rebuild its graph on every call. Relative error uses a 1e-6 floor in
/// the denominator so near-zero gradients do not blow up the ratio.
GradCheckReport grad_check(const std::function<Tensor()>& f,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double step = 1e-5);

}  // namespace xneusm::ad
