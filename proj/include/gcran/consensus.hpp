#ifndef GCRAN_CONSENSUS_HPP
#define GCRAN_CONSENSUS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gcran/model.hpp"
#include "gcran/state.hpp"
#include "gcran/types.hpp"
#include "gcran/wmmse.hpp"

namespace gcran {

/// Equality rows A y_m + B z = 0 of the splitting.
///
/// Rows 0..N-1:        P_n - Lambda_n sum_k x_{n,k}
/// Rows N..N+NK-1:     t_{n,k} - x_{n,k}
/// Row N + NK:         P_e - k_c sum_k mu'_k - P_C sum_n b_n
///
/// y_m = [P (N); P_e; mu' (K); t (NK)], z = [b (N); a (NK); x (NK)].
struct ConsensusMatrices {
  MatrixXd A;
  MatrixXd B;
};

ConsensusMatrices build_matrices(const ScenarioConfig& cfg);

int equality_rows(const ScenarioConfig& cfg);

VectorXd stack_ym(const YBlock& y);
VectorXd stack_z(const ZBlock& z);

/// sum_n G'(P_n) + G'(P_e).
double trade_objective(const ScenarioConfig& cfg, const YBlock& y);

/// Membership in the mixed-integer set: binary b and a, a <= b,
/// at least one active RRH, x >= 0, Lambda_n sum_k x_{n,k} <= b_n P_n^M and
/// x_{n,k} = 0 when a_{n,k} = 0.
bool in_topology_set(const ScenarioConfig& cfg, const ZBlock& z, double tol = 1e-9);

/// f(y) + gamma' res + rho/2 |res|^2 with res = A y_m + B z; +inf when z is
/// outside the mixed-integer set.
double augmented_lagrangian(const ScenarioConfig& cfg, const YBlock& y, const ZBlock& z, const DualState& dual,
                            const ConsensusMatrices& mats);

struct Residuals {
  VectorXd primal;  // A y_m + B z
  VectorXd dual;    // rho A' B (z - z_prev)
};

Residuals residuals(const YBlock& y, const ZBlock& z, const ZBlock& z_prev, const ConsensusMatrices& mats,
                    double rho);

struct AdmmOptions {
  double rho = 1.0;
  bool adaptive_rho = false;
  double tol_abs = 1e-4;
  double tol_rel = 1e-3;
  int max_iter = 500;
  double y_tol = 1e-6;
  bool greedy_topology = false;
  int max_enum = 12;
};

struct TraceRow {
  int iteration = 0;
  double objective = 0;
  double primal_norm = 0;
  double dual_norm = 0;
  double rho = 0;
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  bool approximate_topology = false;  // a greedy z-update was used

  /// Header plus one line per iteration. A non-empty `label` is written
  /// as a leading column (used to tag outer iterations).
  void write_csv(std::ostream& os, const std::string& label = {}, bool header = true) const;
};

struct AdmmResult {
  PrimalState state;
  DualState dual;
  ConvergenceTrace trace;
  int iterations = 0;
};

/// Consensus ADMM on the surrogate problem: continuous update, topology
/// update, multiplier step, until both residuals pass the scaled
/// tolerances or max_iter is reached. Returns the final iterate when
/// converged and the iterate with the smallest primal residual otherwise.
/// `dual0` warm-starts the multipliers (zeros when null). Throws Infeasible
/// when the continuous update cannot meet the QoS targets.
AdmmResult admm_solve(const SurrogateCoeffs& coeffs, const ScenarioConfig& cfg, const PrimalState& init,
                      const AdmmOptions& opts, const DualState* dual0 = nullptr);

}  // namespace gcran

#endif  // GCRAN_CONSENSUS_HPP
