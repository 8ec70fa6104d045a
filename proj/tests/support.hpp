#ifndef GCRAN_TESTS_SUPPORT_HPP
#define GCRAN_TESTS_SUPPORT_HPP

// Shared instance generators and brute-force references for the unit tests
// and the acceptance binary. The references deliberately avoid the library's
// solvers: they work from the problem statement with grids and 1-D searches.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gcran/consensus.hpp"
#include "gcran/model.hpp"
#include "gcran/runner.hpp"
#include "gcran/state.hpp"
#include "gcran/wmmse.hpp"

namespace gcran::testing {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline MatrixXcd random_beams(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  MatrixXcd w(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) w(i, j) = {g(rng), g(rng)};
  return w;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Golden-section minimization of a unimodal function on [lo, hi].
template <typename F>
double golden_min(F f, double lo, double hi, int iters = 200) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return std::min({f(a), f(b), fc, fd});
}

/// Max-form trading cost, written out independently of the energy module.
inline double grid_cost(double p, double harvested, double buy, double sell) {
  return p >= harvested ? buy * (p - harvested) : -sell * (harvested - p);
}

/// A tiny instance (two RRHs, one single-antenna user) with small power caps
/// so that a 200-point grid on x resolves the z-update objective to ~1e-4.
struct TinyInstance {
  ScenarioConfig cfg;
  ChannelState ch;
  SurrogateCoeffs coeffs;
  YBlock y;
  ZBlock z;
  DualState dual;
};

inline TinyInstance make_tiny_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TinyInstance t;
  t.cfg = make_scenario(2, 1, 1, seed);
  ScenarioConfig& cfg = t.cfg;
  for (int n = 0; n < 2; ++n) {
    cfg.max_tx_power(n) = uniform(rng, 0.5, 2.0);
    cfg.amp_inefficiency(n) = uniform(rng, 1.0, 3.0);
    cfg.harvested_rrh(n) = uniform(rng, 0.0, 1.0);
  }
  cfg.harvested_cloud = uniform(rng, 0.0, 20.0);
  cfg.arrival_rates(0) = uniform(rng, 1e6, 4e6);
  t.ch = generate_channels(cfg, seed);

  // Expansion point: matched filter, scaled until the rate comfortably
  // exceeds what the delay target needs.
  MatrixXcd w0(2, 1);
  for (int n = 0; n < 2; ++n) w0(n, 0) = std::conj(t.ch.h(0, n)) / std::abs(t.ch.h(0, n)) * 0.2;
  for (int i = 0; i < 40; ++i) {
    const double r = achievable_rate(0, w0, t.ch.h, cfg.noise_power(0), cfg.bandwidth_hz);
    if (r > 2.0 * cfg.arrival_rates(0) + 4e3) break;
    w0 *= 1.5;
  }
  t.coeffs = build_coeffs(w0, t.ch.h, cfg.noise_power);

  const double rho = uniform(rng, 0.5, 1.5);
  t.dual.rho = rho;
  t.dual.gamma.resize(equality_rows(cfg));
  std::normal_distribution<double> g(0.0, 0.3);
  for (Index i = 0; i < t.dual.gamma.size(); ++i) t.dual.gamma(i) = g(rng);

  t.z.b = VectorXi::Ones(2);
  t.z.a = VectorXi::Ones(2);
  t.z.x.resize(2);
  for (int n = 0; n < 2; ++n) t.z.x(n) = uniform(rng, 0.0, 0.5) * cfg.max_tx_power(n) / cfg.amp_inefficiency(n);

  t.y.w = w0;
  t.y.t = w0.col(0).cwiseAbs2() * 1.2;
  t.y.r = VectorXd::Constant(1, achievable_rate(0, w0, t.ch.h, cfg.noise_power(0), cfg.bandwidth_hz));
  t.y.mu_cubed = VectorXd::Constant(1, std::pow(5.0 * cfg.arrival_rates(0), 3));
  t.y.p.resize(2);
  for (int n = 0; n < 2; ++n) t.y.p(n) = uniform(rng, 0.0, cfg.max_tx_power(n));
  t.y.p_cloud = uniform(rng, 5.0, 30.0);
  return t;
}

/// The z-update objective gamma'Bz + rho/2 |A y_m + B z|^2 written row by row.
inline double z_rows_objective(const ScenarioConfig& cfg, const YBlock& y, const DualState& d, const VectorXi& b,
                               const VectorXd& x) {
  const int N = cfg.n_rrh, K = cfg.n_users;
  double val = 0.0;
  auto row = [&](int i, double ay, double bz) {
    const double res = ay + bz;
    val += d.gamma(i) * bz + 0.5 * d.rho * res * res;
  };
  for (int n = 0; n < N; ++n) row(n, y.p(n), -cfg.amp_inefficiency(n) * x.segment(n * K, K).sum());
  for (int i = 0; i < N * K; ++i) row(N + i, y.t(i), -x(i));
  row(N + N * K, y.p_cloud - cfg.compute_coeff * y.mu_cubed.sum(), -cfg.backhaul_power * b.sum());
  return val;
}

/// Exhaustive z reference for N = 2, K = 1: every activity and association
/// pattern, with the radiated powers on a `points`-point grid of [0, cap].
inline double z_enumeration(const ScenarioConfig& cfg, const YBlock& y, const DualState& d, int points = 200) {
  double best = kInf;
  for (int pattern = 1; pattern < 4; ++pattern) {
    VectorXi b(2);
    b << (pattern & 1), (pattern >> 1) & 1;
    for (int assoc = 0; assoc < 4; ++assoc) {
      const int a0 = assoc & 1, a1 = (assoc >> 1) & 1;
      if (a0 > b(0) || a1 > b(1)) continue;
      const int n0 = a0 ? points : 1, n1 = a1 ? points : 1;
      const double top0 = cfg.max_tx_power(0) / cfg.amp_inefficiency(0);
      const double top1 = cfg.max_tx_power(1) / cfg.amp_inefficiency(1);
      VectorXd x(2);
      for (int i = 0; i < n0; ++i) {
        x(0) = a0 ? top0 * i / (points - 1) : 0.0;
        for (int j = 0; j < n1; ++j) {
          x(1) = a1 ? top1 * j / (points - 1) : 0.0;
          best = std::min(best, z_rows_objective(cfg, y, d, b, x));
        }
      }
    }
  }
  return best;
}

/// y-update reference for N = 2, K = 1, L = 1.
///
/// For fixed beam magnitudes (m_1, m_2) the remaining variables decouple:
/// the slack t_n is a clamped 1-D quadratic, the phases only move the
/// effective gain s = h^H w within an annulus and the best |s| is a clamped
/// 1-D concave maximization, the rate is the surrogate at that s, the
/// compute cube sits at its delay floor and the cloud power is a 1-D convex
/// search. The outer 2-D problem is solved by successive grid refinement.
/// RRH powers do not interact with the rest and are searched separately.
struct YOracle {
  const ScenarioConfig& cfg;
  const SurrogateCoeffs& coeffs;
  const ZBlock& z;
  const DualState& dual;
  double power_hint = 0.0;  // a beam power known to reach the rate target

  double buy() const { return cfg.price_buy; }
  double sell() const { return cfg.price_sell; }

  double rrh_part() const {
    double total = 0.0;
    for (int n = 0; n < 2; ++n) {
      const double target = cfg.amp_inefficiency(n) * z.x(n);
      const double g = dual.gamma(n), rho = dual.rho;
      const double span = (std::abs(g) + buy() + 1.0) / rho;
      total += golden_min(
          [&](double p) {
            return grid_cost(p, cfg.harvested_rrh(n), buy(), sell()) + g * p + 0.5 * rho * (p - target) * (p - target);
          },
          target - span, target + span);
    }
    return total;
  }

  double magnitudes(double m1, double m2) const {
    const double rho = dual.rho;
    double val = 0.0;
    const double m[2] = {m1, m2};
    for (int n = 0; n < 2; ++n) {
      const double g = dual.gamma(2 + n);
      const double t = std::max(m[n] * m[n], z.x(n) - g / rho);
      val += g * t + 0.5 * rho * (t - z.x(n)) * (t - z.x(n));
    }

    // Surrogate: c1 + 2 v Re(conj(u) s) - v |u|^2 |s|^2, maximized over the
    // reachable |s| with the phase aligned to u.
    const double a = m1 * std::abs(coeffs.h(0, 0)), b = m2 * std::abs(coeffs.h(0, 1));
    const double v = coeffs.v(0), au = std::abs(coeffs.u(0));
    double s = au > 0 ? 1.0 / au : a + b;
    s = std::clamp(s, std::abs(a - b), a + b);
    const double nats = coeffs.c1(0) + 2.0 * v * au * s - v * au * au * s * s;
    const double rate = cfg.bandwidth_hz / std::numbers::ln2 * nats;

    const double lam = cfg.arrival_rates(0), tau = cfg.delay_qos(0);
    if (!(rate > lam)) return kInf;
    const double left = tau - 1.0 / (rate - lam);
    if (!(left > 0)) return kInf;
    const double mu = lam + 1.0 / left;
    const double q = cfg.compute_coeff * mu * mu * mu;
    const double c = cfg.backhaul_power * z.b.sum();
    const double ge = dual.gamma(4);
    const double span = (std::abs(ge) + buy() + 1.0) / rho;
    val += golden_min(
        [&](double dev) {
          const double pe = q + c + dev;
          return grid_cost(pe, cfg.harvested_cloud, buy(), sell()) + ge * (pe - q) + 0.5 * rho * dev * dev;
        },
        -span, span);
    return val;
  }

  double solve() const {
    // Upper end of the magnitude search: beyond it the slack penalty alone
    // exceeds any achievable saving.
    double top = 0.0;
    for (int n = 0; n < 2; ++n) top = std::max(top, z.x(n) + std::abs(dual.gamma(2 + n)) / dual.rho);
    top = std::max(top, 4.0 * power_hint);
    double lo1 = 0.0, lo2 = 0.0, step = 2.0 * std::sqrt(top + 1.0) / 200.0;
    int cells = 200;
    double best = kInf, b1 = 0.0, b2 = 0.0;
    for (int level = 0; level < 30; ++level) {
      for (int i = 0; i <= cells; ++i) {
        for (int j = 0; j <= cells; ++j) {
          const double m1 = lo1 + i * step, m2 = lo2 + j * step;
          if (m1 < 0 || m2 < 0) continue;
          const double f = magnitudes(m1, m2);
          if (f < best) {
            best = f;
            b1 = m1;
            b2 = m2;
          }
        }
      }
      lo1 = b1 - 2.0 * step;
      lo2 = b2 - 2.0 * step;
      step *= 0.2;
      cells = 20;
    }
    return best + rrh_part();
  }
};

/// Largest relative violation of the report constraints: delay target with
/// the exact rate, power caps, a <= b with null beams off the association,
/// P_n = Lambda_n sum_k |w_nk|^2 and the cloud power balance. Also checks the
/// reported cost against an independent recomputation.
inline double report_violation(const ScenarioConfig& cfg, const ChannelState& ch, const RunReport& rep) {
  const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;
  double worst = 0.0;
  auto rel = [](double excess, double scale) { return std::max(0.0, excess) / std::max(1.0, std::abs(scale)); };
  if (rep.b.sum() < 1) worst = kInf;
  for (int k = 0; k < K; ++k) {
    const auto gains = (ch.h.row(k).conjugate() * rep.w).cwiseAbs2().eval();
    const double sinr_k = gains(k) / (cfg.noise_power(k) + gains.sum() - gains(k));
    const double rate = cfg.bandwidth_hz * std::log2(1.0 + sinr_k);
    const double lam = cfg.arrival_rates(k), mu = rep.compute(k);
    if (!(rate > lam) || !(mu > lam)) return kInf;
    const double delay = 1.0 / (mu - lam) + 1.0 / (rate - lam);
    worst = std::max(worst, (delay - cfg.delay_qos(k)) / cfg.delay_qos(k));
  }
  double cost = 0.0;
  for (int n = 0; n < N; ++n) {
    double radiated = 0.0;
    for (int k = 0; k < K; ++k) {
      const double pw = rep.w.col(k).segment(n * L, L).squaredNorm();
      if (rep.a(n * K + k) > rep.b(n)) worst = kInf;
      if (!rep.a(n * K + k) && pw > 0.0) worst = kInf;
      radiated += pw;
    }
    const double consumed = cfg.amp_inefficiency(n) * radiated;
    worst = std::max(worst, rel(rep.p(n) - rep.b(n) * cfg.max_tx_power(n), cfg.max_tx_power(n)));
    worst = std::max(worst, std::abs(rep.p(n) - consumed) / std::max(1e-3, consumed));
    cost += grid_cost(rep.p(n), cfg.harvested_rrh(n), cfg.price_buy, cfg.price_sell);
  }
  double cloud = cfg.backhaul_power * rep.b.sum();
  for (int k = 0; k < K; ++k) cloud += cfg.compute_coeff * std::pow(rep.compute(k), 3);
  worst = std::max(worst, std::abs(rep.p_cloud - cloud) / std::max(1.0, cloud));
  cost += grid_cost(rep.p_cloud, cfg.harvested_cloud, cfg.price_buy, cfg.price_sell);
  worst = std::max(worst, std::abs(rep.cost - cost) / std::max(1.0, std::abs(cost)));
  return worst;
}

}  // namespace gcran::testing

#endif  // GCRAN_TESTS_SUPPORT_HPP
