#ifndef GCRAN_MIP_SOLVER_HPP
#define GCRAN_MIP_SOLVER_HPP

#include "gcran/consensus.hpp"
#include "gcran/model.hpp"
#include "gcran/state.hpp"
#include "gcran/types.hpp"

namespace gcran {

/// Exact minimizer of
///   (target - Lambda sum_k x_k)^2 / 2 + |x - q|^2 / 2
///   s.t. x >= 0, sum_k x_k <= cap
/// where target = P_n + gamma_n / rho and q = t_n + gamma_t / rho. The
/// solution has the form x_k = max(q_k + theta, 0); theta is found by a
/// sweep over the sorted breakpoints, first without and then with the sum
/// constraint.
VectorXd per_rrh_qp(double target, double lambda, const VectorXd& q, double cap);

/// The same problem with RRH n switched off (x = 0) when `active` is false.
VectorXd per_rrh_block(const ScenarioConfig& cfg, int n, bool active, const YBlock& y, const DualState& dual);

struct MipOptions {
  bool greedy = false;
  int max_enum = 12;
};

struct ZSolveInfo {
  double objective = 0;  // gamma' B z + rho/2 |A y_m + B z|^2
  int patterns = 0;      // patterns evaluated
  bool approximate = false;
};

/// gamma' B z + rho/2 |A y_m + B z|^2, +inf outside the mixed-integer set.
double z_objective(const ScenarioConfig& cfg, const YBlock& y, const ZBlock& z, const DualState& dual,
                   const ConsensusMatrices& mats);

/// Minimizes the z part of the augmented Lagrangian over the mixed-integer
/// set. With enumeration every non-empty activity pattern is scored from
/// per-RRH on/off costs plus the pattern-dependent cloud row, which makes
/// the result the exact global minimizer; ties go to fewer active RRHs, then
/// the lowest pattern bitmask. The greedy mode starts from all RRHs on and
/// switches off the best single RRH while that improves the objective.
///
/// The association a carries no cost and appears in no equality row, so it
/// is read off the support of x: a_{n,k} = 1 iff b_n = 1 and x_{n,k} > 1e-9.
ZBlock solve_z(const ScenarioConfig& cfg, const YBlock& y, const DualState& dual, const ConsensusMatrices& mats,
               const MipOptions& opts = {}, ZSolveInfo* info = nullptr);

}  // namespace gcran

#endif  // GCRAN_MIP_SOLVER_HPP
