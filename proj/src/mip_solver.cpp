#include "gcran/mip_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>

namespace gcran {

namespace {

// Breakpoints of theta -> sum_k max(q_k + theta, 0), largest q first.
std::vector<double> sorted_desc(const VectorXd& q) {
  std::vector<double> s(q.data(), q.data() + q.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

// Active count j such that the root of `value(theta) = rhs` lies in
// [-s[j-1], -s[j]]; `at_break(j)` evaluates the function at theta = -s[j].
template <typename F>
std::size_t bracket(const std::vector<double>& s, double rhs, std::size_t first, F at_break) {
  for (std::size_t j = first; j < s.size(); ++j) {
    if (at_break(j) >= rhs) return j;
  }
  return s.size();
}

}  // namespace

VectorXd per_rrh_qp(double target, double lambda, const VectorXd& q, double cap) {
  require(lambda > 0 && cap > 0, "per-RRH problem needs positive inefficiency and cap");
  const std::vector<double> s = sorted_desc(q);
  const double l2 = lambda * lambda;

  // prefix[j] = sum of the j largest q.
  std::vector<double> prefix(s.size() + 1, 0.0);
  for (std::size_t j = 0; j < s.size(); ++j) prefix[j + 1] = prefix[j] + s[j];

  // theta + lambda^2 sigma(theta) = lambda target.
  const std::size_t j = bracket(s, lambda * target, 0, [&](std::size_t i) {
    return -s[i] + l2 * (prefix[i] - static_cast<double>(i) * s[i]);
  });
  double theta = (lambda * target - l2 * prefix[j]) / (1.0 + l2 * static_cast<double>(j));

  VectorXd x = (q.array() + theta).max(0.0);
  if (x.sum() > cap) {
    // Sum constraint active: sigma(theta) = cap.
    const std::size_t m = bracket(s, cap, 1, [&](std::size_t i) { return prefix[i] - static_cast<double>(i) * s[i]; });
    theta = (cap - prefix[m]) / static_cast<double>(m);
    x = (q.array() + theta).max(0.0);
  }
  return x;
}

VectorXd per_rrh_block(const ScenarioConfig& cfg, int n, bool active, const YBlock& y, const DualState& dual) {
  const int N = cfg.n_rrh, K = cfg.n_users;
  if (!active) return VectorXd::Zero(K);
  const double rho = dual.rho;
  const double target = y.p(n) + dual.gamma(n) / rho;
  const VectorXd q = y.t.segment(n * K, K) + dual.gamma.segment(N + n * K, K) / rho;
  return per_rrh_qp(target, cfg.amp_inefficiency(n), q, cfg.max_tx_power(n) / cfg.amp_inefficiency(n));
}

double z_objective(const ScenarioConfig& cfg, const YBlock& y, const ZBlock& z, const DualState& dual,
                   const ConsensusMatrices& mats) {
  if (!in_topology_set(cfg, z)) return std::numeric_limits<double>::infinity();
  const VectorXd bz = mats.B * stack_z(z);
  const VectorXd res = mats.A * stack_ym(y) + bz;
  return dual.gamma.dot(bz) + 0.5 * dual.rho * res.squaredNorm();
}

ZBlock solve_z(const ScenarioConfig& cfg, const YBlock& y, const DualState& dual, const ConsensusMatrices& mats,
               const MipOptions& opts, ZSolveInfo* info) {
  const int N = cfg.n_rrh, K = cfg.n_users;
  require(dual.gamma.size() == equality_rows(cfg), "dual vector has the wrong length");
  require(mats.B.rows() == equality_rows(cfg), "consensus matrices do not match the scenario");
  require(opts.greedy || N <= opts.max_enum,
          "too many RRHs for exhaustive topology search; enable the greedy topology mode");
  const double rho = dual.rho;

  // Per-RRH costs (up to a pattern-independent constant) of both states.
  std::vector<VectorXd> x_on(N);
  VectorXd cost_on(N), cost_off(N);
  for (int n = 0; n < N; ++n) {
    const double target = y.p(n) + dual.gamma(n) / rho;
    const VectorXd q = y.t.segment(n * K, K) + dual.gamma.segment(N + n * K, K) / rho;
    x_on[n] = per_rrh_block(cfg, n, true, y, dual);
    const double lam = cfg.amp_inefficiency(n);
    cost_on(n) = 0.5 * rho * (std::pow(target - lam * x_on[n].sum(), 2) + (x_on[n] - q).squaredNorm());
    cost_off(n) = 0.5 * rho * (target * target + q.squaredNorm());
  }
  double cloud_target = y.p_cloud - cfg.compute_coeff * y.mu_cubed.sum() + dual.gamma(N + N * K) / rho;
  auto cloud_cost = [&](int active) {
    const double e = cloud_target - cfg.backhaul_power * active;
    return 0.5 * rho * e * e;
  };
  auto pattern_cost = [&](unsigned mask) {
    double c = 0.0;
    int active = 0;
    for (int n = 0; n < N; ++n) {
      if (mask >> n & 1u) {
        c += cost_on(n);
        ++active;
      } else {
        c += cost_off(n);
      }
    }
    return c + cloud_cost(active);
  };
  auto better = [](double c, int active, unsigned mask, double best_c, int best_active, unsigned best_mask) {
    const double tie = 1e-12 * (1.0 + std::abs(best_c));
    if (c < best_c - tie) return true;
    if (c > best_c + tie) return false;
    if (active != best_active) return active < best_active;
    return mask < best_mask;
  };

  unsigned best_mask = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  int best_active = N + 1;
  int evaluated = 0;
  if (!opts.greedy) {
    for (unsigned mask = 1; mask < (1u << N); ++mask) {
      const double c = pattern_cost(mask);
      const int active = std::popcount(mask);
      ++evaluated;
      if (better(c, active, mask, best_cost, best_active, best_mask)) {
        best_cost = c;
        best_active = active;
        best_mask = mask;
      }
    }
  } else {
    best_mask = N >= 32 ? ~0u : (1u << N) - 1u;
    best_cost = pattern_cost(best_mask);
    best_active = N;
    ++evaluated;
    for (;;) {
      unsigned cand_mask = best_mask;
      double cand_cost = best_cost;
      int cand_active = best_active;
      if (best_active > 1) {
        for (int n = 0; n < N; ++n) {
          if (!(best_mask >> n & 1u)) continue;
          const unsigned mask = best_mask & ~(1u << n);
          const double c = pattern_cost(mask);
          ++evaluated;
          if (better(c, best_active - 1, mask, cand_cost, cand_active, cand_mask)) {
            cand_cost = c;
            cand_active = best_active - 1;
            cand_mask = mask;
          }
        }
      }
      if (cand_mask == best_mask) break;
      best_mask = cand_mask;
      best_cost = cand_cost;
      best_active = cand_active;
    }
  }

  ZBlock z;
  z.b = VectorXi::Zero(N);
  z.a = VectorXi::Zero(N * K);
  z.x = VectorXd::Zero(N * K);
  for (int n = 0; n < N; ++n) {
    if (!(best_mask >> n & 1u)) continue;
    z.b(n) = 1;
    z.x.segment(n * K, K) = x_on[n];
    for (int k = 0; k < K; ++k) z.a(n * K + k) = x_on[n](k) > 1e-9 ? 1 : 0;
  }
  // Entries at or below the support threshold are dropped with their a.
  for (int i = 0; i < N * K; ++i)
    if (!z.a(i)) z.x(i) = 0.0;

  if (info) {
    info->objective = z_objective(cfg, y, z, dual, mats);
    info->patterns = evaluated;
    info->approximate = opts.greedy;
  }
  return z;
}

}  // namespace gcran
