#ifndef GCRAN_RUNNER_HPP
#define GCRAN_RUNNER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gcran/consensus.hpp"
#include "gcran/model.hpp"
#include "gcran/state.hpp"
#include "gcran/types.hpp"

namespace gcran {

/// Matched-filter start: every RRH on, each w_{n,k} along h_{k,n} with the
/// consumed-power cap P_n^M split equally across users.
MatrixXcd matched_filter_beams(const ScenarioConfig& cfg, const ChannelState& ch);

/// Regularized zero-forcing directions, scaled by one common factor so the
/// most loaded RRH sits at its power cap.
MatrixXcd zero_forcing_beams(const ScenarioConfig& cfg, const ChannelState& ch);

/// A beamformer/topology pair judged with the exact rate expression. The
/// compute rate of each user is the smallest that meets its delay target
/// with the achieved radio rate.
struct PointEvaluation {
  VectorXd rates;    // bit/s
  VectorXd compute;  // bit/s, +inf where the delay target is out of reach
  VectorXd delays;   // s
  VectorXd p;        // RRH consumed power
  double p_cloud = 0;
  double cost = 0;   // sum_n G(P_n) + G(P_e), +inf when infeasible
  bool feasible = false;
  std::vector<int> failing_users;
};

/// Beams of RRHs with b_n = 0 are ignored.
PointEvaluation evaluate_point(const ScenarioConfig& cfg, const ChannelState& ch, const MatrixXcd& w,
                               const VectorXi& b);

struct RunOptions {
  AdmmOptions admm;
  double outer_tol = 1e-4;
  int max_outer = 30;
  /// Re-solve each ADMM topology with the pattern fixed and improve it by
  /// single-RRH on/off moves.
  bool polish = true;
};

enum class RunStatus { Converged, NotConverged, Infeasible };

struct OuterRecord {
  int iteration = 0;
  double objective = 0;       // cost of the accepted point
  double admm_objective = 0;  // cost of the raw ADMM point (+inf if infeasible)
  int admm_iterations = 0;
  bool admm_converged = false;
  int active_rrhs = 0;
};

struct RunReport {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::NotConverged;
  std::string message;
  std::vector<int> infeasible_users;

  std::vector<double> objectives;  // [0] is the initial point
  std::vector<OuterRecord> outer;
  std::vector<ConvergenceTrace> traces;

  VectorXi b;
  VectorXi a;  // N * K
  MatrixXcd w;
  VectorXd p;
  double p_cloud = 0;
  VectorXd rates;
  VectorXd compute;
  VectorXd delays;
  double cost = 0;

  int outer_iterations = 0;
  int admm_iterations_total = 0;
  double elapsed_seconds = 0;  // not written to output files

  bool feasible() const { return status != RunStatus::Infeasible; }
};

/// Outer WMMSE loop: build the rate minorant at the current beamformers, run
/// consensus ADMM on it, accept the new point, repeat until the objective
/// change stays below outer_tol (relative, floored at 1) twice in a row or
/// max_outer is reached.
RunReport wmmse_admm(const ScenarioConfig& cfg, const ChannelState& ch, const RunOptions& opts = {});

struct SweepRow {
  double lambda_mbps = 0;
  double cost = 0;
  bool feasible = false;
  int outer_iters = 0;
  int admm_iters_total = 0;
  RunStatus status = RunStatus::NotConverged;
};

struct SweepOptions {
  RunOptions run;
  /// Channel realizations averaged per point (seeds seed, seed + 1, ...).
  int realizations = 1;
};

/// Runs wmmse_admm for every arrival rate in `lambda_mbps` (applied to all
/// users) on the same channel realization(s).
std::vector<SweepRow> sweep_arrival_rates(const ScenarioConfig& cfg, const std::vector<double>& lambda_mbps,
                                          std::uint64_t seed, const SweepOptions& opts = {});

/// Parses "start:stop:step" (inclusive stop, Mbps).
std::vector<double> parse_grid(const std::string& spec);

}  // namespace gcran

#endif  // GCRAN_RUNNER_HPP
