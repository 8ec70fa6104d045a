#include "gcran/runner.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "gcran/convex_solver.hpp"
#include "gcran/energy.hpp"
#include "gcran/qos.hpp"
#include "gcran/wmmse.hpp"

namespace gcran {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MatrixXcd masked(const ScenarioConfig& cfg, const MatrixXcd& w, const VectorXi& b) {
  MatrixXcd out = w;
  for (int n = 0; n < cfg.n_rrh; ++n) {
    if (b(n)) continue;
    for (int k = 0; k < cfg.n_users; ++k) beam_block(out, n, k, cfg.n_antennas).setZero();
  }
  return out;
}

// A point of the outer loop: beamformers, topology and their evaluation.
struct Candidate {
  MatrixXcd w;
  VectorXi b;
  PointEvaluation eval;

  PrimalState state(const ScenarioConfig& cfg) const {
    const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;
    PrimalState s;
    s.y.w = w;
    s.y.t.resize(N * K);
    for (int n = 0; n < N; ++n)
      for (int k = 0; k < K; ++k) s.y.t(n * K + k) = beam_block(w, n, k, L).squaredNorm();
    s.y.p = eval.p;
    s.y.p_cloud = eval.p_cloud;
    s.y.mu_cubed = eval.compute.array().cube();
    s.y.r = eval.rates;
    s.z.b = b;
    s.z.a = VectorXi::Zero(N * K);
    for (int n = 0; n < N; ++n)
      for (int k = 0; k < K; ++k) s.z.a(n * K + k) = b(n);
    s.z.x = s.y.t;
    return s;
  }
};

std::string pattern_key(const VectorXi& b) {
  std::string key;
  for (Index i = 0; i < b.size(); ++i) key.push_back(b(i) ? '1' : '0');
  return key;
}

bool improves(double cost, double incumbent) {
  return cost < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
}

// Fixed-pattern solves of one outer iteration, cached by pattern.
class PatternSolver {
 public:
  PatternSolver(const ScenarioConfig& cfg, const ChannelState& ch, const SurrogateCoeffs& coeffs)
      : cfg_(cfg), ch_(ch), coeffs_(coeffs) {}

  std::optional<Candidate> solve(const VectorXi& b, const YBlock& warm) {
    const std::string key = pattern_key(b);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::optional<Candidate> out;
    if (auto sol = solve_fixed_topology(cfg_, coeffs_, b, &warm)) {
      Candidate c{masked(cfg_, sol->state.y.w, b), b, {}};
      c.eval = evaluate_point(cfg_, ch_, c.w, b);
      if (c.eval.feasible) out = std::move(c);
    }
    cache_.emplace(key, out);
    return out;
  }

  // Best-improvement search over single-RRH on/off moves.
  Candidate local_search(Candidate best) {
    for (;;) {
      std::optional<Candidate> move;
      for (int n = 0; n < cfg_.n_rrh; ++n) {
        VectorXi b = best.b;
        b(n) = 1 - b(n);
        if (b.sum() == 0) continue;
        auto c = solve(b, best.state(cfg_).y);
        if (c && improves(c->eval.cost, move ? move->eval.cost : best.eval.cost)) move = std::move(c);
      }
      if (!move) return best;
      best = std::move(*move);
    }
  }

 private:
  const ScenarioConfig& cfg_;
  const ChannelState& ch_;
  const SurrogateCoeffs& coeffs_;
  std::map<std::string, std::optional<Candidate>> cache_;
};

void fill_final(RunReport& rep, const ScenarioConfig& cfg, const Candidate& c) {
  const int N = cfg.n_rrh, K = cfg.n_users;
  rep.b = c.b;
  rep.a = VectorXi::Zero(N * K);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) rep.a(n * K + k) = c.b(n);
  rep.w = c.w;
  rep.p = c.eval.p;
  rep.p_cloud = c.eval.p_cloud;
  rep.rates = c.eval.rates;
  rep.compute = c.eval.compute;
  rep.delays = c.eval.delays;
  rep.cost = c.eval.cost;
}

}  // namespace

MatrixXcd matched_filter_beams(const ScenarioConfig& cfg, const ChannelState& ch) {
  const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;
  MatrixXcd w = MatrixXcd::Zero(Index(N) * L, K);
  for (int n = 0; n < N; ++n) {
    const double share = cfg.max_tx_power(n) / cfg.amp_inefficiency(n) / K;
    for (int k = 0; k < K; ++k) {
      const VectorXcd hk = ch.h.row(k).segment(Index(n) * L, L).transpose();
      const double norm = hk.norm();
      if (norm > 0) beam_block(w, n, k, L) = hk * (std::sqrt(share) / norm);
    }
  }
  return w;
}

MatrixXcd zero_forcing_beams(const ScenarioConfig& cfg, const ChannelState& ch) {
  const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;
  const MatrixXcd g = ch.h.conjugate();
  double budget = 0.0;
  for (int n = 0; n < N; ++n) budget += cfg.max_tx_power(n) / cfg.amp_inefficiency(n);
  const double reg = cfg.noise_power.sum() / budget;
  MatrixXcd gram = g * g.adjoint();
  gram.diagonal().array() += reg;
  MatrixXcd w = g.adjoint() * gram.ldlt().solve(MatrixXcd::Identity(K, K));
  for (int k = 0; k < K; ++k) {
    const double norm = w.col(k).norm();
    if (norm > 0) w.col(k) /= norm;
  }
  double load = 0.0;
  for (int n = 0; n < N; ++n) {
    double radiated = 0.0;
    for (int k = 0; k < K; ++k) radiated += beam_block(w, n, k, L).squaredNorm();
    load = std::max(load, cfg.amp_inefficiency(n) * radiated / cfg.max_tx_power(n));
  }
  if (load > 0) w /= std::sqrt(load);
  return w;
}

PointEvaluation evaluate_point(const ScenarioConfig& cfg, const ChannelState& ch, const MatrixXcd& w,
                               const VectorXi& b) {
  const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;
  require(b.size() == N, "activity pattern has the wrong length");
  require(w.rows() == Index(N) * L && w.cols() == K, "beamformer matrix has the wrong shape");
  const MatrixXcd wm = masked(cfg, w, b);

  PointEvaluation e;
  e.rates.resize(K);
  e.compute.resize(K);
  e.delays.resize(K);
  e.feasible = true;
  for (int k = 0; k < K; ++k) {
    e.rates(k) = achievable_rate(k, wm, ch.h, cfg.noise_power(k), cfg.bandwidth_hz);
    e.compute(k) = min_compute_for_delay(e.rates(k), cfg.arrival_rates(k), cfg.delay_qos(k));
    if (std::isfinite(e.compute(k))) {
      e.delays(k) = total_delay(e.compute(k), e.rates(k), cfg.arrival_rates(k));
    } else {
      e.delays(k) = kInf;
      e.feasible = false;
      e.failing_users.push_back(k);
    }
  }
  e.p = VectorXd::Zero(N);
  for (int n = 0; n < N; ++n) {
    if (!b(n)) continue;
    double radiated = 0.0;
    for (int k = 0; k < K; ++k) radiated += beam_block(wm, n, k, L).squaredNorm();
    e.p(n) = cfg.amp_inefficiency(n) * radiated;
    if (e.p(n) > cfg.max_tx_power(n) * (1.0 + 1e-9)) e.feasible = false;
  }
  if (!e.feasible) {
    e.p_cloud = kInf;
    e.cost = kInf;
    return e;
  }
  e.p_cloud = cloud_power(VectorXd(e.compute.array().cube()), b, cfg.compute_coeff, cfg.backhaul_power);
  e.cost = trade_cost(e.p_cloud, cfg.harvested_cloud, cfg.price_buy, cfg.price_sell);
  for (int n = 0; n < N; ++n) e.cost += trade_cost(e.p(n), cfg.harvested_rrh(n), cfg.price_buy, cfg.price_sell);
  return e;
}

RunReport wmmse_admm(const ScenarioConfig& cfg, const ChannelState& ch, const RunOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  cfg.validate();
  require(ch.users() == cfg.n_users && ch.dim() == Index(cfg.n_rrh) * cfg.n_antennas,
          "channel does not match the scenario");
  require(opts.max_outer >= 0, "outer iteration budget must be non-negative");
  const int N = cfg.n_rrh;

  RunReport rep;
  rep.config_hash = config_hash(cfg);
  rep.seed = cfg.rng_seed;
  auto finish = [&]() {
    rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
  };

  // Initial point: matched filter, then regularized zero forcing, then a
  // fixed-topology solve on the minorant built at the better of the two.
  const VectorXi all_on = VectorXi::Ones(N);
  Candidate cur{matched_filter_beams(cfg, ch), all_on, {}};
  cur.eval = evaluate_point(cfg, ch, cur.w, all_on);
  if (!cur.eval.feasible) {
    Candidate zf{zero_forcing_beams(cfg, ch), all_on, {}};
    zf.eval = evaluate_point(cfg, ch, zf.w, all_on);
    if (zf.eval.feasible || zf.eval.failing_users.size() < cur.eval.failing_users.size()) cur = std::move(zf);
  }
  if (!cur.eval.feasible) {
    const SurrogateCoeffs coeffs = build_coeffs(cur.w, ch.h, cfg.noise_power);
    const auto sol = solve_fixed_topology(cfg, coeffs, all_on);
    if (sol) {
      Candidate c{sol->state.y.w, all_on, {}};
      c.eval = evaluate_point(cfg, ch, c.w, all_on);
      if (c.eval.feasible) cur = std::move(c);
    }
  }
  if (!cur.eval.feasible) {
    rep.status = RunStatus::Infeasible;
    rep.message = "delay targets cannot be met with every RRH on at full power";
    rep.infeasible_users = cur.eval.failing_users;
    if (rep.infeasible_users.empty()) {
      for (int k = 0; k < cfg.n_users; ++k) rep.infeasible_users.push_back(k);
    }
    fill_final(rep, cfg, cur);
    return finish();
  }
  rep.objectives.push_back(cur.eval.cost);

  DualState dual;
  bool have_dual = false;
  int quiet = 0;
  for (int it = 1; it <= opts.max_outer; ++it) {
    const SurrogateCoeffs coeffs = build_coeffs(cur.w, ch.h, cfg.noise_power);
    const PrimalState start = cur.state(cfg);
    const AdmmResult ar = admm_solve(coeffs, cfg, start, opts.admm, have_dual ? &dual : nullptr);
    dual = ar.dual;
    have_dual = true;
    rep.traces.push_back(ar.trace);
    rep.admm_iterations_total += ar.iterations;

    OuterRecord rec;
    rec.iteration = it;
    rec.admm_iterations = ar.iterations;
    rec.admm_converged = ar.trace.converged;

    Candidate raw{masked(cfg, ar.state.y.w, ar.state.z.b), ar.state.z.b, {}};
    raw.eval = evaluate_point(cfg, ch, raw.w, raw.b);
    rec.admm_objective = raw.eval.cost;

    const double previous = cur.eval.cost;
    Candidate next = cur;
    if (raw.eval.feasible && raw.eval.cost < next.eval.cost) next = raw;
    if (opts.polish) {
      PatternSolver patterns(cfg, ch, coeffs);
      if (auto c = patterns.solve(raw.b, ar.state.y); c && c->eval.cost < next.eval.cost) next = std::move(*c);
      if (auto c = patterns.solve(cur.b, start.y); c && c->eval.cost < next.eval.cost) next = std::move(*c);
      next = patterns.local_search(std::move(next));
    }
    cur = std::move(next);
    rec.objective = cur.eval.cost;
    rec.active_rrhs = cur.b.sum();
    rep.outer.push_back(rec);
    rep.objectives.push_back(cur.eval.cost);
    rep.outer_iterations = it;

    const double change = std::abs(cur.eval.cost - previous) / std::max(1.0, std::abs(previous));
    quiet = change < opts.outer_tol ? quiet + 1 : 0;
    if (quiet >= 2) {
      rep.status = RunStatus::Converged;
      break;
    }
  }
  if (rep.status != RunStatus::Converged) rep.message = "outer iteration budget exhausted";
  fill_final(rep, cfg, cur);
  return finish();
}

std::vector<SweepRow> sweep_arrival_rates(const ScenarioConfig& cfg, const std::vector<double>& lambda_mbps,
                                          std::uint64_t seed, const SweepOptions& opts) {
  require(opts.realizations >= 1, "need at least one channel realization");
  std::vector<SweepRow> rows;
  for (double lam : lambda_mbps) {
    require(lam > 0, "arrival rates must be positive");
    SweepRow row;
    row.lambda_mbps = lam;
    row.feasible = true;
    row.status = RunStatus::Converged;
    double total = 0.0;
    for (int r = 0; r < opts.realizations; ++r) {
      ScenarioConfig c = cfg;
      c.arrival_rates = VectorXd::Constant(c.n_users, lam * 1e6);
      c.rng_seed = seed + static_cast<std::uint64_t>(r);
      const ChannelState ch = generate_channels(c, c.rng_seed);
      const RunReport rep = wmmse_admm(c, ch, opts.run);
      row.outer_iters += rep.outer_iterations;
      row.admm_iters_total += rep.admm_iterations_total;
      if (!rep.feasible()) {
        row.feasible = false;
        row.status = RunStatus::Infeasible;
      } else if (rep.status == RunStatus::NotConverged && row.status == RunStatus::Converged) {
        row.status = RunStatus::NotConverged;
      }
      total += rep.cost;
    }
    row.cost = row.feasible ? total / opts.realizations : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::istringstream in(spec);
  double start = 0, stop = 0, step = 0;
  char c1 = 0, c2 = 0;
  if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
    throw DomainError("grid must have the form start:stop:step");
  }
  require(step > 0 && stop >= start, "grid needs a positive step and stop >= start");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long i = 0; i <= count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

}  // namespace gcran
