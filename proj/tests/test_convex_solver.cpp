#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gcran/convex_solver.hpp"
#include "gcran/energy.hpp"
#include "gcran/qos.hpp"
#include "support.hpp"

using namespace gcran;
using namespace gcran::testing;

namespace {

// Largest violation of the continuous-block constraints, relative where a
// natural scale exists.
double y_violation(const ScenarioConfig& cfg, const SurrogateCoeffs& c, const YBlock& y) {
  const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;
  double worst = 0.0;
  for (int k = 0; k < K; ++k) {
    const double cap = surrogate_rate(k, y.w, c, cfg.bandwidth_hz);
    worst = std::max(worst, (y.r(k) - cap) / cap);
    const double mu = std::cbrt(y.mu_cubed(k)), lam = cfg.arrival_rates(k);
    if (!(mu > lam) || !(y.r(k) > lam)) return kInf;
    worst = std::max(worst, (total_delay(mu, y.r(k), lam) - cfg.delay_qos(k)) / cfg.delay_qos(k));
  }
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) worst = std::max(worst, beam_block(y.w, n, k, L).squaredNorm() - y.t(n * K + k));
  return worst;
}

double y_objective(const TinyInstance& t, const YBlock& y) {
  const auto mats = build_matrices(t.cfg);
  const VectorXd bz = mats.B * stack_z(t.z);
  return augmented_lagrangian(t.cfg, y, t.z, t.dual, mats) - t.dual.gamma.dot(bz);
}

}  // namespace

TEST(Barrier, BoundConstrainedQuadratic) {
  BarrierProgram prog(1);
  prog.Q(0, 0) = 2.0;
  prog.c(0) = -6.0;  // (x - 3)^2 - 9
  prog.add_linear({0}, {1.0}, -1.0);
  VectorXd x0(1);
  x0 << 0.0;
  const BarrierResult r = prog.solve(x0);
  ASSERT_EQ(r.status, BarrierStatus::Optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
  EXPECT_NEAR(r.objective, -5.0, 1e-6);
}

TEST(Barrier, ConeWithLinearObjective) {
  // min t - x s.t. x^2 <= t: the minimum -1/4 sits at x = 1/2.
  BarrierProgram prog(2);
  prog.c << -1.0, 1.0;
  prog.add_cone({0}, 1);
  VectorXd x0(2);
  x0 << 0.0, 1.0;
  const BarrierResult r = prog.solve(x0);
  ASSERT_EQ(r.status, BarrierStatus::Optimal);
  EXPECT_NEAR(r.x(0), 0.5, 1e-5);
  EXPECT_NEAR(r.objective, -0.25, 1e-6);
}

TEST(Barrier, InfeasibleStartIsRepairedOrReported) {
  BarrierProgram prog(1);
  prog.Q(0, 0) = 1.0;
  prog.add_linear({0}, {-1.0}, 2.0);  // x >= 2
  VectorXd x0(1);
  x0 << -5.0;
  const BarrierResult r = prog.solve(x0);
  ASSERT_EQ(r.status, BarrierStatus::Optimal);
  EXPECT_NEAR(r.x(0), 2.0, 1e-6);

  BarrierProgram empty(1);
  empty.add_linear({0}, {-1.0}, 2.0, 0);  // x >= 2
  empty.add_linear({0}, {1.0}, 1.0, 1);   // x <= -1
  const BarrierResult e = empty.solve(x0);
  EXPECT_EQ(e.status, BarrierStatus::Infeasible);
  EXPECT_FALSE(e.binding_users.empty());
}

TEST(Barrier, DelayConstraintOneDimensional) {
  // min mu' + r with the delay bound only: brute-force over r on a fine grid
  // with mu' at its smallest feasible value.
  const double lam = 1.0, tau = 2.0;
  BarrierProgram prog(2);
  prog.c << 1.0, 1.0;
  prog.add_delay(0, 0, 1, lam, tau);
  VectorXd x0(2);
  x0 << 27.0, 4.0;
  const BarrierResult r = prog.solve(x0);
  ASSERT_EQ(r.status, BarrierStatus::Optimal);
  const double oracle = golden_min(
      [&](double rate) {
        const double mu = min_compute_for_delay(rate, lam, tau);
        return std::isfinite(mu) ? mu * mu * mu + rate : kInf;
      },
      lam + 1.0 / tau + 1e-9, 10.0);
  EXPECT_NEAR(r.objective, oracle, 1e-5);
}

TEST(ProxTradeCost, MatchesOneDimensionalSearch) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 300; ++i) {
    const double target = uniform(rng, -5, 5), g = uniform(rng, -2, 2), rho = uniform(rng, 0.1, 5);
    const double ph = uniform(rng, -3, 3);
    const double p = prox_trade_cost(target, g, rho, ph, 1.0, 0.1);
    auto f = [&](double q) { return grid_cost(q, ph, 1.0, 0.1) + g * q + 0.5 * rho * (q - target) * (q - target); };
    const double span = (std::abs(g) + 2.0) / rho;
    EXPECT_LE(f(p), golden_min(f, target - span, target + span) + 1e-10);
  }
}

TEST(SolveY, FeasibleAndMatchesReference) {
  for (std::uint64_t seed = 100; seed < 104; ++seed) {
    TinyInstance t = make_tiny_instance(seed);
    YSolveInfo info;
    const YBlock y = solve_y({t.cfg, t.coeffs, t.z, t.dual}, t.y, 1e-8, &info);
    EXPECT_LE(y_violation(t.cfg, t.coeffs, y), 1e-6) << "seed " << seed;
    EXPECT_NEAR(info.objective, y_objective(t, y), 1e-6 * (1 + std::abs(info.objective)));
    YOracle oracle{t.cfg, t.coeffs, t.z, t.dual, t.y.w.squaredNorm()};
    EXPECT_NEAR(info.objective, oracle.solve(), 1e-3) << "seed " << seed;
  }
}

TEST(SolveY, NoFeasiblePerturbationImproves) {
  TinyInstance t = make_tiny_instance(7);
  const YBlock y = solve_y({t.cfg, t.coeffs, t.z, t.dual}, t.y, 1e-9);
  const double base = y_objective(t, y);
  std::mt19937_64 rng(16);
  std::normal_distribution<double> g(0.0, 1.0);
  int tried = 0;
  for (int attempt = 0; attempt < 5000 && tried < 100; ++attempt) {
    YBlock p = y;
    const double eps = 1e-4;
    p.p_cloud += eps * g(rng);
    p.p(0) += eps * g(rng);
    p.p(1) += eps * g(rng);
    p.mu_cubed(0) *= 1.0 + eps * g(rng);
    p.r(0) *= 1.0 + eps * g(rng);
    for (Index i = 0; i < p.t.size(); ++i) p.t(i) += eps * g(rng) * (1e-3 + p.t(i));
    for (Index i = 0; i < p.w.size(); ++i) p.w(i) += eps * std::abs(y.w(i)) * std::complex<double>(g(rng), g(rng));
    if (y_violation(t.cfg, t.coeffs, p) > 0) continue;
    ++tried;
    EXPECT_GE(y_objective(t, p), base - 1e-6);
  }
  EXPECT_GE(tried, 20);
}

TEST(SolveY, TighterDelayTargetCostsMore) {
  TinyInstance t = make_tiny_instance(21);
  YSolveInfo loose, tight;
  const YBlock y = solve_y({t.cfg, t.coeffs, t.z, t.dual}, t.y, 1e-8, &loose);
  const double achieved = total_delay(std::cbrt(y.mu_cubed(0)), y.r(0), t.cfg.arrival_rates(0));
  t.cfg.delay_qos(0) = 0.8 * achieved;
  solve_y({t.cfg, t.coeffs, t.z, t.dual}, t.y, 1e-8, &tight);
  EXPECT_GT(tight.objective, loose.objective);
}

TEST(SolveY, UnreachableTargetThrowsInfeasible) {
  TinyInstance t = make_tiny_instance(22);
  t.cfg.delay_qos(0) = 1e-9;
  try {
    solve_y({t.cfg, t.coeffs, t.z, t.dual}, t.y);
    FAIL() << "expected Infeasible";
  } catch (const Infeasible& e) {
    ASSERT_EQ(e.users().size(), 1u);
    EXPECT_EQ(e.users()[0], 0);
  }
}

TEST(FixedTopology, RespectsPatternAndCaps) {
  ScenarioConfig cfg = default_small_scenario();
  const ChannelState ch = generate_channels(cfg, cfg.rng_seed);
  const auto coeffs = build_coeffs(matched_filter_beams(cfg, ch), ch.h, cfg.noise_power);
  VectorXi b = VectorXi::Ones(cfg.n_rrh);
  b(1) = 0;
  const auto sol = solve_fixed_topology(cfg, coeffs, b);
  ASSERT_TRUE(sol.has_value());
  const YBlock& y = sol->state.y;
  for (int k = 0; k < cfg.n_users; ++k) EXPECT_EQ(beam_block(y.w, 1, k, cfg.n_antennas).norm(), 0.0);
  for (int n = 0; n < cfg.n_rrh; ++n) EXPECT_LE(y.p(n), cfg.max_tx_power(n) * (1 + 1e-6));
  EXPECT_LE(y_violation(cfg, coeffs, y), 1e-6);
  EXPECT_NEAR(sol->cost, trade_objective(cfg, y), 1e-9 * (1 + std::abs(sol->cost)));
}
