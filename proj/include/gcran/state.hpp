#ifndef GCRAN_STATE_HPP
#define GCRAN_STATE_HPP

#include "gcran/types.hpp"

namespace gcran {

/// Continuous block of the splitting: powers, compute, slack powers, rates
/// and beamformers. Per-(RRH, user) entries use index n * K + k.
struct YBlock {
  VectorXd p;          // RRH consumed power, N
  double p_cloud = 0;  // cloud consumed power
  VectorXd mu_cubed;   // (bit/s)^3, K
  VectorXd t;          // radiated-power slack, N * K
  VectorXd r;          // bit/s, K
  MatrixXcd w;         // N L x K, column k is w_k
};

/// Mixed-integer block: RRH activity b, association a, radiated power x.
struct ZBlock {
  VectorXi b;  // N
  VectorXi a;  // N * K
  VectorXd x;  // N * K
};

struct PrimalState {
  YBlock y;
  ZBlock z;
};

/// Multipliers of the consensus equalities and the penalty weight.
struct DualState {
  VectorXd gamma;
  double rho = 1.0;
};

/// w_{n,k}: the L-entry slice of w_k that RRH n transmits.
inline auto beam_block(const MatrixXcd& w, int n, int k, int L) { return w.col(k).segment(Index(n) * L, L); }
inline auto beam_block(MatrixXcd& w, int n, int k, int L) { return w.col(k).segment(Index(n) * L, L); }

}  // namespace gcran

#endif  // GCRAN_STATE_HPP
