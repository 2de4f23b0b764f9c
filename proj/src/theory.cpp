#include "xneusm/theory.hpp"

#include <cmath>
#include <cstdio>

#include "xneusm/dataset.hpp"
#include "xneusm/glema.hpp"
#include "xneusm/kernels.hpp"
#include "xneusm/rng.hpp"

namespace xneusm {

namespace {

struct AttentionInstance {
  int n = 0;
  std::vector<double> a;  // n x n, row-stochastic on the graph's adjacency
};

// Random row-stochastic attention matrix supported on a random connected
// graph's adjacency. Every row has at least one neighbour, so rows sum to 1
// exactly as in the model's masked softmax.
AttentionInstance random_attention(int graph_size, std::uint64_t seed) {
  DatasetStats stats;
  stats.mean_nodes = graph_size;
  stats.mean_degree = 3.0;
  stats.degree_std = 1.0;
  stats.t_v = 4;
  const Graph g = synth_target(stats, seed);

  AttentionInstance inst;
  inst.n = g.node_count();
  Rng rng(derive_seed(seed, 0xa77e, 0));
  inst.a.assign(static_cast<std::size_t>(inst.n) * inst.n, 0.0);
  for (int i = 0; i < inst.n; ++i) {
    double row_sum = 0.0;
    for (int j : g.neighbors[i]) {
      const double w = 0.05 + rng.uniform01();
      inst.a[static_cast<std::size_t>(i) * inst.n + j] = w;
      row_sum += w;
    }
    for (int j : g.neighbors[i]) inst.a[static_cast<std::size_t>(i) * inst.n + j] /= row_sum;
  }
  return inst;
}

// Uniform-alpha truncated diffusion operator: Z(0)=I, Z(k)=(1-a)A Z(k-1)+a I.
// Acting on the identity recovers the operator itself, no feature inverse
// needed.
std::vector<double> uniform_operator(const std::vector<double>& a1, int n, double alpha,
                                     int hops) {
  std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;
  std::vector<double> az(z.size());
  for (int k = 0; k < hops; ++k) {
    kern::gemm_nn(a1.data(), z.data(), az.data(), n, n, n);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - alpha) * az[i];
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] += alpha;
  }
  return z;
}

}  // namespace

BoundCheck check_error_bound(int graph_size, double alpha, int hops, int horizon,
                             std::uint64_t seed) {
  const AttentionInstance inst = random_attention(graph_size, seed);
  const int n = inst.n;
  const std::vector<double> truncated = uniform_operator(inst.a, n, alpha, hops);
  const std::vector<double> reference = uniform_operator(inst.a, n, alpha, horizon);

  double err = 0.0;
  for (std::size_t i = 0; i < truncated.size(); ++i)
    err += std::fabs(reference[i] - truncated[i]);
  err /= static_cast<double>(n) * n;

  BoundCheck out;
  out.empirical_err = err;
  out.bound = std::pow(1.0 - alpha, hops + 1);
  out.pass = err <= out.bound + 1e-12;
  return out;
}

double uniform_reduction_gap(int graph_size, double alpha, int hops, std::uint64_t seed) {
  const AttentionInstance inst = random_attention(graph_size, seed);
  const std::vector<double>& a1v = inst.a;
  const int n = inst.n;
  const int f = 7;

  Rng rng(derive_seed(seed, 0xfea7, 0));
  std::vector<double> xv(static_cast<std::size_t>(n) * f);
  for (double& x : xv) x = rng.uniform(-1.0, 1.0);

  // Implementation path: the layer's per-node diffusion with beta == alpha.
  ad::Tensor a1 = ad::Tensor::constant(n, n, a1v);
  ad::Tensor xp = ad::Tensor::constant(n, f, xv);
  ad::Tensor beta = ad::Tensor::filled(n, 1, alpha);
  const std::vector<double> z_impl = diffuse(a1, xp, beta, hops).value();

  // Independent uniform recurrence with scalar arithmetic.
  std::vector<double> z = xv, az(z.size());
  for (int k = 0; k < hops; ++k) {
    kern::gemm_nn(a1v.data(), z.data(), az.data(), n, n, f);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - alpha) * az[i] + alpha * xv[i];
  }

  double gap = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) gap = std::max(gap, std::fabs(z[i] - z_impl[i]));
  return gap;
}

FixedPointCheck check_fixed_point(int graph_size, std::uint64_t seed, double tolerance,
                                  double beta_lo, double beta_hi, int horizon) {
  const AttentionInstance inst = random_attention(graph_size, seed);
  const std::vector<double>& a1v = inst.a;
  const int n = inst.n;
  const int f = 5;

  Rng rng(derive_seed(seed, 0xbe7a, 0));
  std::vector<double> xv(static_cast<std::size_t>(n) * f);
  for (double& x : xv) x = rng.uniform(-1.0, 1.0);
  std::vector<double> beta(n);
  double ratio_bound = 0.0;
  for (double& b : beta) {
    b = rng.uniform(beta_lo, beta_hi);
    ratio_bound = std::max(ratio_bound, 1.0 - b);
  }

  // Iterate, keeping every iterate's max-abs deviation from the final one.
  std::vector<std::vector<double>> iterates;
  std::vector<double> z = xv, az(z.size());
  iterates.push_back(z);
  for (int k = 0; k < horizon; ++k) {
    kern::gemm_nn(a1v.data(), z.data(), az.data(), n, n, f);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < f; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * f + c;
        z[i] = (1.0 - beta[r]) * az[i] + beta[r] * xv[i];
      }
    iterates.push_back(z);
  }
  const std::vector<double>& zstar = iterates.back();

  std::vector<double> dev(iterates.size(), 0.0);
  for (std::size_t k = 0; k < iterates.size(); ++k)
    for (std::size_t i = 0; i < zstar.size(); ++i)
      dev[k] = std::max(dev[k], std::fabs(iterates[k][i] - zstar[i]));

  // Deviations eventually sink into roundoff; ratios are only meaningful
  // while the deviation is well above it.
  const double floor = 1e-5 * std::max(dev[0], 1e-30);
  FixedPointCheck out;
  out.ratio_bound = ratio_bound;
  for (std::size_t k = 0; k + 1 < dev.size(); ++k) {
    if (dev[k] <= floor) break;
    out.contraction_ratio = std::max(out.contraction_ratio, dev[k + 1] / dev[k]);
  }

  kern::gemm_nn(a1v.data(), zstar.data(), az.data(), n, n, f);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < f; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * f + c;
      const double rhs = (1.0 - beta[r]) * az[i] + beta[r] * xv[i];
      out.residual = std::max(out.residual, std::fabs(zstar[i] - rhs));
    }

  out.pass = out.contraction_ratio <= ratio_bound + 1e-9 && out.residual <= tolerance;
  return out;
}

BoundSweep bound_sweep(int n_graphs, int max_graph_size, const std::vector<double>& alphas,
                       const std::vector<int>& hop_grid, int horizon, std::uint64_t seed) {
  BoundSweep sweep;
  for (int g = 0; g < n_graphs; ++g) {
    // Sizes spread over [5, max]; the generator redraws around the mean.
    const int size = 5 + static_cast<int>(derive_seed(seed, g, 0x517e) %
                                          static_cast<std::uint64_t>(max_graph_size - 4));
    const AttentionInstance inst = random_attention(size, derive_seed(seed, g, 0));
    const int n = inst.n;
    for (double alpha : alphas) {
      // One pass to the reference horizon, snapshotting at every requested K.
      std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
      for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;
      std::vector<double> az(z.size());
      std::vector<std::vector<double>> snapshots;
      int max_hop = 0;
      for (int hops : hop_grid) max_hop = std::max(max_hop, hops);
      for (int k = 1; k <= horizon; ++k) {
        kern::gemm_nn(inst.a.data(), z.data(), az.data(), n, n, n);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - alpha) * az[i];
        for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] += alpha;
        if (k <= max_hop) snapshots.push_back(z);
      }
      for (int hops : hop_grid) {
        const std::vector<double>& truncated = snapshots[hops - 1];
        double err = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) err += std::fabs(z[i] - truncated[i]);
        err /= static_cast<double>(n) * n;
        const double bound = std::pow(1.0 - alpha, hops + 1);
        ++sweep.checked;
        sweep.passed += err <= bound + 1e-12;
        sweep.worst_excess = std::max(sweep.worst_excess, err - bound);
      }
    }
  }
  return sweep;
}

void emit_bound_curve(const std::vector<double>& alphas, const std::vector<int>& hop_grid,
                      std::ostream& out, int graph_size, int horizon, std::uint64_t seed) {
  out << "alpha,K,bound,empirical_err\n";
  char buf[128];
  for (double alpha : alphas) {
    for (int hops : hop_grid) {
      const BoundCheck c = check_error_bound(graph_size, alpha, hops, horizon,
                                             derive_seed(seed, static_cast<std::uint64_t>(hops),
                                                         static_cast<std::uint64_t>(alpha * 1e6)));
      std::snprintf(buf, sizeof buf, "%.3g,%d,%.12g,%.12g\n", alpha, hops, c.bound,
                    c.empirical_err);
      out << buf;
    }
  }
}

}  // namespace xneusm
