#include "xneusm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "xneusm/error.hpp"
#include "xneusm/kernels.hpp"

namespace xneusm::ad {

void Node::ensure_grad() {
  if (g.size() != size()) g.assign(size(), 0.0);
}

namespace {

std::shared_ptr<Node> make_leaf(int rows, int cols, std::vector<double> data,
                                bool requires_grad) {
  if (static_cast<std::size_t>(rows) * cols != data.size())
    fail(Errc::shape_mismatch, "data length does not match shape");
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->v = std::move(data);
  n->requires_grad = requires_grad;
  return n;
}

// Interior node; tracks parents only when a gradient will flow.
std::shared_ptr<Node> make_op(int rows, int cols,
                              std::initializer_list<std::shared_ptr<Node>> parents,
                              std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->v.resize(n->size());
  n->leaf = false;
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->requires_grad;
  n->requires_grad = needs;
  if (needs) {
    n->parents = parents;
    n->backprop = std::move(backprop);
  }
  return n;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(Errc::shape_mismatch, std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                                   std::to_string(a.cols()) + " vs " +
                                   std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

}  // namespace

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  return Tensor(make_leaf(rows, cols,
                          std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0),
                          requires_grad));
}

Tensor Tensor::constant(int rows, int cols, std::vector<double> data) {
  return Tensor(make_leaf(rows, cols, std::move(data), false));
}

Tensor Tensor::param(int rows, int cols, std::vector<double> data) {
  return Tensor(make_leaf(rows, cols, std::move(data), true));
}

Tensor Tensor::scalar(double v) { return constant(1, 1, {v}); }

Tensor Tensor::filled(int rows, int cols, double v) {
  return constant(rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, v));
}

int Tensor::rows() const { return node_->rows; }
int Tensor::cols() const { return node_->cols; }
std::size_t Tensor::size() const { return node_->size(); }
bool Tensor::requires_grad() const { return node_->requires_grad; }
const std::vector<double>& Tensor::value() const { return node_->v; }

std::vector<double>& Tensor::raw_value() {
  if (!node_->leaf) fail(Errc::domain_error, "raw_value on interior tape node");
  return node_->v;
}

const std::vector<double>& Tensor::grad() const {
  node_->ensure_grad();
  return node_->g;
}

void Tensor::zero_grad() { node_->g.assign(node_->size(), 0.0); }

double Tensor::at(int r, int c) const { return node_->v[static_cast<std::size_t>(r) * cols() + c]; }

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) fail(Errc::shape_mismatch, "item() on non-scalar tensor");
  return node_->v[0];
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    fail(Errc::shape_mismatch, "matmul: " + std::to_string(a.cols()) + " vs " +
                                   std::to_string(b.rows()));
  auto an = a.node(), bn = b.node();
  const int m = a.rows(), k = a.cols(), n = b.cols();
  auto out = make_op(m, n, {an, bn}, [an, bn, m, k, n](Node& o) {
    if (an->requires_grad) {
      an->ensure_grad();  // dA += dC·Bᵀ
      kern::gemm_nt(o.g.data(), bn->v.data(), an->g.data(), m, n, k, true);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();  // dB += Aᵀ·dC
      kern::gemm_tn(an->v.data(), o.g.data(), bn->g.data(), k, m, n, true);
    }
  });
  kern::gemm_nn(an->v.data(), bn->v.data(), out->v.data(), m, k, n);
  return Tensor(out);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols())
    fail(Errc::shape_mismatch, "matmul_nt: " + std::to_string(a.cols()) + " vs " +
                                   std::to_string(b.cols()));
  auto an = a.node(), bn = b.node();
  const int m = a.rows(), k = a.cols(), n = b.rows();
  auto out = make_op(m, n, {an, bn}, [an, bn, m, k, n](Node& o) {
    if (an->requires_grad) {
      an->ensure_grad();  // dA += dC·B
      kern::gemm_nn(o.g.data(), bn->v.data(), an->g.data(), m, n, k, true);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();  // dB += dCᵀ·A
      kern::gemm_tn(o.g.data(), an->v.data(), bn->g.data(), n, m, k, true);
    }
  });
  kern::gemm_nt(an->v.data(), bn->v.data(), out->v.data(), m, k, n);
  return Tensor(out);
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  auto an = a.node(), bn = b.node();
  auto out = make_op(a.rows(), a.cols(), {an, bn}, [an, bn](Node& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      kern::ew_axpy(1.0, o.g.data(), an->g.data(), o.size());
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      kern::ew_axpy(1.0, o.g.data(), bn->g.data(), o.size());
    }
  });
  kern::ew_add(an->v.data(), bn->v.data(), out->v.data(), out->size());
  return Tensor(out);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  auto an = a.node(), bn = b.node();
  auto out = make_op(a.rows(), a.cols(), {an, bn}, [an, bn](Node& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      kern::ew_axpy(1.0, o.g.data(), an->g.data(), o.size());
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      kern::ew_axpy(-1.0, o.g.data(), bn->g.data(), o.size());
    }
  });
  kern::ew_sub(an->v.data(), bn->v.data(), out->v.data(), out->size());
  return Tensor(out);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  auto an = a.node(), bn = b.node();
  auto out = make_op(a.rows(), a.cols(), {an, bn}, [an, bn](Node& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t i = 0; i < o.size(); ++i) an->g[i] += o.g[i] * bn->v[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < o.size(); ++i) bn->g[i] += o.g[i] * an->v[i];
    }
  });
  kern::ew_mul(an->v.data(), bn->v.data(), out->v.data(), out->size());
  return Tensor(out);
}

Tensor div(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "div");
  auto an = a.node(), bn = b.node();
  auto out = make_op(a.rows(), a.cols(), {an, bn}, [an, bn](Node& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t i = 0; i < o.size(); ++i) an->g[i] += o.g[i] / bn->v[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < o.size(); ++i)
        bn->g[i] -= o.g[i] * an->v[i] / (bn->v[i] * bn->v[i]);
    }
  });
  for (std::size_t i = 0; i < out->size(); ++i) out->v[i] = an->v[i] / bn->v[i];
  return Tensor(out);
}

Tensor scalar_mul(double c, const Tensor& a) {
  auto an = a.node();
  auto out = make_op(a.rows(), a.cols(), {an}, [an, c](Node& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      kern::ew_axpy(c, o.g.data(), an->g.data(), o.size());
    }
  });
  kern::ew_scale(c, an->v.data(), out->v.data(), out->size());
  return Tensor(out);
}

Tensor add_broadcast_scalar(const Tensor& m, const Tensor& s) {
  if (s.rows() != 1 || s.cols() != 1) fail(Errc::shape_mismatch, "broadcast operand must be 1x1");
  auto mn = m.node(), sn = s.node();
  auto out = make_op(m.rows(), m.cols(), {mn, sn}, [mn, sn](Node& o) {
    if (mn->requires_grad) {
      mn->ensure_grad();
      kern::ew_axpy(1.0, o.g.data(), mn->g.data(), o.size());
    }
    if (sn->requires_grad) {
      sn->ensure_grad();
      double acc = 0.0;
      for (std::size_t i = 0; i < o.size(); ++i) acc += o.g[i];
      sn->g[0] += acc;
    }
  });
  const double sv = sn->v[0];
  for (std::size_t i = 0; i < out->size(); ++i) out->v[i] = mn->v[i] + sv;
  return Tensor(out);
}

Tensor rowwise_scale(const Tensor& v, const Tensor& m) {
  if (v.cols() != 1 || v.rows() != m.rows())
    fail(Errc::shape_mismatch, "rowwise_scale: scale vector must be rows x 1");
  auto vn = v.node(), mn = m.node();
  const int rows = m.rows(), cols = m.cols();
  auto out = make_op(rows, cols, {vn, mn}, [vn, mn, rows, cols](Node& o) {
    if (vn->requires_grad) {
      vn->ensure_grad();
      for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* gr = o.g.data() + static_cast<std::size_t>(r) * cols;
        const double* mr = mn->v.data() + static_cast<std::size_t>(r) * cols;
        for (int j = 0; j < cols; ++j) acc += gr[j] * mr[j];
        vn->g[r] += acc;
      }
    }
    if (mn->requires_grad) {
      mn->ensure_grad();
      kern::row_scale(vn->v.data(), o.g.data(), mn->g.data(), rows, cols, true);
    }
  });
  kern::row_scale(vn->v.data(), mn->v.data(), out->v.data(), rows, cols);
  return Tensor(out);
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) fail(Errc::shape_mismatch, "concat_cols: row mismatch");
  auto an = a.node(), bn = b.node();
  const int rows = a.rows(), ca = a.cols(), cb = b.cols();
  auto out = make_op(rows, ca + cb, {an, bn}, [an, bn, rows, ca, cb](Node& o) {
    for (int r = 0; r < rows; ++r) {
      const double* gr = o.g.data() + static_cast<std::size_t>(r) * (ca + cb);
      if (an->requires_grad) {
        an->ensure_grad();
        for (int j = 0; j < ca; ++j) an->g[static_cast<std::size_t>(r) * ca + j] += gr[j];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int j = 0; j < cb; ++j) bn->g[static_cast<std::size_t>(r) * cb + j] += gr[ca + j];
      }
    }
  });
  for (int r = 0; r < rows; ++r) {
    double* dst = out->v.data() + static_cast<std::size_t>(r) * (ca + cb);
    std::copy_n(an->v.data() + static_cast<std::size_t>(r) * ca, ca, dst);
    std::copy_n(bn->v.data() + static_cast<std::size_t>(r) * cb, cb, dst + ca);
  }
  return Tensor(out);
}

Tensor transpose(const Tensor& a) {
  auto an = a.node();
  const int rows = a.rows(), cols = a.cols();
  auto out = make_op(cols, rows, {an}, [an, rows, cols](Node& o) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (int r = 0; r < rows; ++r)
      for (int j = 0; j < cols; ++j)
        an->g[static_cast<std::size_t>(r) * cols + j] +=
            o.g[static_cast<std::size_t>(j) * rows + r];
  });
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < cols; ++j)
      out->v[static_cast<std::size_t>(j) * rows + r] = an->v[static_cast<std::size_t>(r) * cols + j];
  return Tensor(out);
}

Tensor leaky_relu(const Tensor& a, double slope) {
  auto an = a.node();
  auto out = make_op(a.rows(), a.cols(), {an}, [an, slope](Node& o) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t i = 0; i < o.size(); ++i)
      an->g[i] += o.g[i] * (an->v[i] > 0.0 ? 1.0 : slope);
  });
  for (std::size_t i = 0; i < out->size(); ++i) {
    const double x = an->v[i];
    out->v[i] = x > 0.0 ? x : slope * x;
  }
  return Tensor(out);
}

Tensor sigmoid(const Tensor& a) {
  auto an = a.node();
  auto out = make_op(a.rows(), a.cols(), {an}, [an](Node& o) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t i = 0; i < o.size(); ++i) an->g[i] += o.g[i] * o.v[i] * (1.0 - o.v[i]);
  });
  for (std::size_t i = 0; i < out->size(); ++i) out->v[i] = 1.0 / (1.0 + std::exp(-an->v[i]));
  return Tensor(out);
}

Tensor exp(const Tensor& a) {
  auto an = a.node();
  auto out = make_op(a.rows(), a.cols(), {an}, [an](Node& o) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t i = 0; i < o.size(); ++i) an->g[i] += o.g[i] * o.v[i];
  });
  for (std::size_t i = 0; i < out->size(); ++i) out->v[i] = std::exp(an->v[i]);
  return Tensor(out);
}

Tensor log_clamped(const Tensor& a, double eps) {
  if (eps <= 0.0) fail(Errc::domain_error, "log_clamped needs a positive clamp");
  auto an = a.node();
  auto out = make_op(a.rows(), a.cols(), {an, }, [an, eps](Node& o) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t i = 0; i < o.size(); ++i)
      if (an->v[i] > eps) an->g[i] += o.g[i] / an->v[i];
  });
  for (std::size_t i = 0; i < out->size(); ++i) out->v[i] = std::log(std::max(an->v[i], eps));
  return Tensor(out);
}

Tensor masked_softmax_rows(const Tensor& e, const Tensor& mask) {
  check_same_shape(e, mask, "masked_softmax_rows");
  auto en = e.node(), kn = mask.node();
  const int rows = e.rows(), cols = e.cols();
  auto out = make_op(rows, cols, {en, kn}, [en, kn, rows, cols](Node& o) {
    if (!en->requires_grad) return;
    en->ensure_grad();
    for (int r = 0; r < rows; ++r) {
      const std::size_t off = static_cast<std::size_t>(r) * cols;
      const double* y = o.v.data() + off;
      const double* gy = o.g.data() + off;
      double dot = 0.0;
      for (int j = 0; j < cols; ++j) dot += gy[j] * y[j];
      for (int j = 0; j < cols; ++j) {
        if (kn->v[off + j] != 0.0) en->g[off + j] += y[j] * (gy[j] - dot);
      }
    }
  });
  for (int r = 0; r < rows; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * cols;
    const double* ev = en->v.data() + off;
    const double* mv = kn->v.data() + off;
    double* y = out->v.data() + off;
    double mx = -1e300;
    bool any = false;
    for (int j = 0; j < cols; ++j) {
      if (mv[j] != 0.0) {
        any = true;
        mx = std::max(mx, ev[j]);
      }
    }
    if (!any) {
      std::fill(y, y + cols, 0.0);
      continue;
    }
    double denom = 0.0;
    for (int j = 0; j < cols; ++j) {
      y[j] = mv[j] != 0.0 ? std::exp(ev[j] - mx) : 0.0;
      denom += y[j];
    }
    for (int j = 0; j < cols; ++j) y[j] /= denom;
  }
  return Tensor(out);
}

Tensor mean_rows_subset(const Tensor& m, const std::vector<int>& rows) {
  if (rows.empty()) fail(Errc::domain_error, "mean_rows_subset: empty row set");
  for (int r : rows)
    if (r < 0 || r >= m.rows()) fail(Errc::shape_mismatch, "mean_rows_subset: row out of range");
  auto mn = m.node();
  const int cols = m.cols();
  const double inv = 1.0 / static_cast<double>(rows.size());
  auto out = make_op(1, cols, {mn}, [mn, rows, cols, inv](Node& o) {
    if (!mn->requires_grad) return;
    mn->ensure_grad();
    for (int r : rows)
      kern::ew_axpy(inv, o.g.data(), mn->g.data() + static_cast<std::size_t>(r) * cols, cols);
  });
  std::fill(out->v.begin(), out->v.end(), 0.0);
  for (int r : rows) {
    const double* src = mn->v.data() + static_cast<std::size_t>(r) * cols;
    for (int j = 0; j < cols; ++j) out->v[j] += src[j];
  }
  for (int j = 0; j < cols; ++j) out->v[j] *= inv;
  return Tensor(out);
}

Tensor sum_all(const Tensor& m) {
  auto mn = m.node();
  auto out = make_op(1, 1, {mn}, [mn](Node& o) {
    if (!mn->requires_grad) return;
    mn->ensure_grad();
    const double g = o.g[0];
    for (std::size_t i = 0; i < mn->size(); ++i) mn->g[i] += g;
  });
  double acc = 0.0;
  for (double x : mn->v) acc += x;
  out->v[0] = acc;
  return Tensor(out);
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1)
    fail(Errc::non_scalar_loss, "backward needs a (1,1) loss");

  // Iterative post-order DFS; the resulting topological order is reversed for
  // the sweep. Pointer identity dedups shared subexpressions.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad();
  loss.node()->g[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop) {
      n->ensure_grad();
      n->backprop(*n);
    }
  }
  // Drop the interior of the tape; leaf gradients stay for the optimizer.
  for (Node* n : order) {
    if (!n->leaf) {
      n->parents.clear();
      n->backprop = nullptr;
      n->g.clear();
      n->g.shrink_to_fit();
    }
  }
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

GradCheckReport grad_check(const std::function<Tensor()>& f,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double step) {
  for (auto& [name, p] : params) p.node()->g.assign(p.size(), 0.0);
  backward(f());

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& [name, p] : params) analytic.push_back(p.grad());

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor p = params[pi].second;  // shares the underlying node
    auto& values = p.raw_value();
    GradCheckEntry entry{params[pi].first, 0.0};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double keep = values[i];
      values[i] = keep + step;
      const double up = f().item();
      values[i] = keep - step;
      const double down = f().item();
      values[i] = keep;
      const double numeric = (up - down) / (2.0 * step);
      const double exact = analytic[pi][i];
      const double scale = std::max({std::fabs(numeric), std::fabs(exact), 1e-6});
      entry.max_rel_err = std::max(entry.max_rel_err, std::fabs(numeric - exact) / scale);
    }
    if (entry.max_rel_err > report.max_rel_err) {
      report.max_rel_err = entry.max_rel_err;
      report.worst = entry.name;
    }
    report.per_param.push_back(std::move(entry));
  }
  return report;
}

}  // namespace xneusm::ad
