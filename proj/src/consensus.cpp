#include "gcran/consensus.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "gcran/convex_solver.hpp"
#include "gcran/energy.hpp"
#include "gcran/mip_solver.hpp"

namespace gcran {

int equality_rows(const ScenarioConfig& cfg) { return cfg.n_rrh * (cfg.n_users + 1) + 1; }

ConsensusMatrices build_matrices(const ScenarioConfig& cfg) {
  const int N = cfg.n_rrh, K = cfg.n_users, NK = N * K;
  const int rows = equality_rows(cfg);
  ConsensusMatrices m;
  m.A = MatrixXd::Zero(rows, (N + 1) * (K + 1));
  m.B = MatrixXd::Zero(rows, (2 * K + 1) * N);

  // Column offsets in y_m and z.
  const int y_pe = N, y_mu = N + 1, y_t = N + 1 + K;
  const int z_x = N + NK;
  for (int n = 0; n < N; ++n) {
    m.A(n, n) = 1.0;
    for (int k = 0; k < K; ++k) m.B(n, z_x + n * K + k) = -cfg.amp_inefficiency(n);
  }
  for (int i = 0; i < NK; ++i) {
    m.A(N + i, y_t + i) = 1.0;
    m.B(N + i, z_x + i) = -1.0;
  }
  const int e = N + NK;
  m.A(e, y_pe) = 1.0;
  for (int k = 0; k < K; ++k) m.A(e, y_mu + k) = -cfg.compute_coeff;
  for (int n = 0; n < N; ++n) m.B(e, n) = -cfg.backhaul_power;
  return m;
}

VectorXd stack_ym(const YBlock& y) {
  const Index N = y.p.size(), K = y.mu_cubed.size();
  VectorXd v((N + 1) * (K + 1));
  v << y.p, y.p_cloud, y.mu_cubed, y.t;
  return v;
}

VectorXd stack_z(const ZBlock& z) {
  VectorXd v(z.b.size() + z.a.size() + z.x.size());
  v << z.b.cast<double>(), z.a.cast<double>(), z.x;
  return v;
}

double trade_objective(const ScenarioConfig& cfg, const YBlock& y) {
  const auto prices = TradePrices<double>::from(cfg.price_buy, cfg.price_sell);
  double f = trade_cost_convex(y.p_cloud, cfg.harvested_cloud, prices);
  for (Index n = 0; n < y.p.size(); ++n) f += trade_cost_convex(y.p(n), cfg.harvested_rrh(n), prices);
  return f;
}

bool in_topology_set(const ScenarioConfig& cfg, const ZBlock& z, double tol) {
  const int N = cfg.n_rrh, K = cfg.n_users;
  if (z.b.size() != N || z.a.size() != N * K || z.x.size() != N * K) return false;
  int active = 0;
  for (int n = 0; n < N; ++n) {
    if (z.b(n) != 0 && z.b(n) != 1) return false;
    active += z.b(n);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      const int a = z.a(n * K + k);
      const double x = z.x(n * K + k);
      if ((a != 0 && a != 1) || a > z.b(n)) return false;
      if (x < -tol || (a == 0 && std::abs(x) > tol)) return false;
      sum += x;
    }
    if (cfg.amp_inefficiency(n) * sum > z.b(n) * cfg.max_tx_power(n) * (1.0 + tol) + tol) return false;
  }
  return active >= 1;
}

double augmented_lagrangian(const ScenarioConfig& cfg, const YBlock& y, const ZBlock& z, const DualState& dual,
                            const ConsensusMatrices& mats) {
  if (!in_topology_set(cfg, z)) return std::numeric_limits<double>::infinity();
  const VectorXd res = mats.A * stack_ym(y) + mats.B * stack_z(z);
  return trade_objective(cfg, y) + dual.gamma.dot(res) + 0.5 * dual.rho * res.squaredNorm();
}

Residuals residuals(const YBlock& y, const ZBlock& z, const ZBlock& z_prev, const ConsensusMatrices& mats,
                    double rho) {
  Residuals r;
  r.primal = mats.A * stack_ym(y) + mats.B * stack_z(z);
  r.dual = rho * (mats.A.transpose() * (mats.B * (stack_z(z) - stack_z(z_prev))));
  return r;
}

void ConvergenceTrace::write_csv(std::ostream& os, const std::string& label, bool header) const {
  if (header) {
    if (!label.empty()) os << "outer,";
    os << "iteration,objective,primal_residual,dual_residual,rho\n";
  }
  const auto old_prec = os.precision(12);
  for (const auto& row : rows) {
    if (!label.empty()) os << label << ',';
    os << row.iteration << ',' << row.objective << ',' << row.primal_norm << ',' << row.dual_norm << ','
       << row.rho << '\n';
  }
  os.precision(old_prec);
}

AdmmResult admm_solve(const SurrogateCoeffs& coeffs, const ScenarioConfig& cfg, const PrimalState& init,
                      const AdmmOptions& opts, const DualState* dual0) {
  require(opts.rho > 0, "penalty parameter must be positive");
  require(opts.max_iter >= 1, "ADMM needs at least one iteration");
  require(in_topology_set(cfg, init.z), "initial topology block is not in the mixed-integer set");
  const ConsensusMatrices mats = build_matrices(cfg);
  const int rows = static_cast<int>(mats.A.rows());

  AdmmResult out;
  DualState dual;
  if (dual0) {
    require(dual0->gamma.size() == rows, "initial multipliers have the wrong length");
    dual = *dual0;
  } else {
    dual.gamma = VectorXd::Zero(rows);
    dual.rho = opts.rho;
  }

  PrimalState cur = init;
  PrimalState best = init;
  DualState best_dual = dual;
  double best_primal = std::numeric_limits<double>::infinity();
  const MipOptions mip{opts.greedy_topology, opts.max_enum};
  out.trace.approximate_topology = opts.greedy_topology;

  for (int it = 1; it <= opts.max_iter; ++it) {
    cur.y = solve_y({cfg, coeffs, cur.z, dual}, cur.y, opts.y_tol);
    const ZBlock z_prev = cur.z;
    cur.z = solve_z(cfg, cur.y, dual, mats, mip);

    const Residuals res = residuals(cur.y, cur.z, z_prev, mats, dual.rho);
    dual.gamma += dual.rho * res.primal;

    const double r_norm = res.primal.norm();
    const double s_norm = res.dual.norm();
    const VectorXd ay = mats.A * stack_ym(cur.y);
    const VectorXd bz = mats.B * stack_z(cur.z);
    const double eps_pri = std::sqrt(static_cast<double>(rows)) * opts.tol_abs + opts.tol_rel * std::max(ay.norm(), bz.norm());
    const double eps_dual = std::sqrt(static_cast<double>(mats.A.cols())) * opts.tol_abs +
                            opts.tol_rel * (mats.A.transpose() * dual.gamma).norm();
    out.trace.rows.push_back({it, trade_objective(cfg, cur.y), r_norm, s_norm, dual.rho});
    out.iterations = it;

    if (r_norm < best_primal) {
      best_primal = r_norm;
      best = cur;
      best_dual = dual;
    }
    if (r_norm <= eps_pri && s_norm <= eps_dual) {
      out.trace.converged = true;
      break;
    }
    if (opts.adaptive_rho) {
      if (r_norm > 10.0 * s_norm) {
        dual.rho *= 2.0;
      } else if (s_norm > 10.0 * r_norm) {
        dual.rho /= 2.0;
      }
    }
  }

  if (out.trace.converged) {
    out.state = cur;
    out.dual = dual;
  } else {
    out.state = best;
    out.dual = best_dual;
  }
  return out;
}

}  // namespace gcran
