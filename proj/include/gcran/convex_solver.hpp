#ifndef GCRAN_CONVEX_SOLVER_HPP
#define GCRAN_CONVEX_SOLVER_HPP

#include <optional>
#include <vector>

#include "gcran/model.hpp"
#include "gcran/state.hpp"
#include "gcran/types.hpp"
#include "gcran/wmmse.hpp"

namespace gcran {

struct BarrierOptions {
  double tol = 1e-6;           // stop when the duality-gap bound is below this
  double feas_tol = 1e-7;      // stationarity residual, relative to 1 + |objective gradient|
  double t0 = 0.0;             // <= 0 picks t0 from the starting point
  double t_growth = 10.0;      // path parameter factor per outer step
  int max_newton = 800;        // across all centering steps
  int max_centering = 100;     // Newton steps per centering step
  double newton_tol = 1e-6;    // half squared Newton decrement
  double armijo = 0.25;
  double backtrack = 0.5;
};

enum class BarrierStatus { Optimal, Infeasible, IterationLimit };

struct BarrierResult {
  VectorXd x;
  double objective = 0;
  double gap = 0;
  int newton_steps = 0;
  BarrierStatus status = BarrierStatus::IterationLimit;
  std::vector<int> binding_users;  // filled when Infeasible
};

/// Interior-point method for
///   minimize c'x + x'Qx / 2 + offset
/// under the constraint catalog of the beamforming subproblems: linear
/// inequalities, power cones |w_{n,k}|^2 <= t_{n,k}, concave-quadratic rate
/// bounds and the two-stage queueing delay bound. The main phase is a
/// primal-dual path-following method; infeasible starting points first go
/// through a log-barrier phase-I problem.
class BarrierProgram {
 public:
  explicit BarrierProgram(int n_vars);

  int size() const { return n_; }
  int constraint_count() const;

  VectorXd c;
  MatrixXd Q;
  double offset = 0;

  /// a'x + b <= 0.
  void add_linear(std::vector<int> idx, std::vector<double> coef, double b, int user = -1);
  /// sum_i x_i^2 - x_t <= 0.
  void add_cone(std::vector<int> idx, int t_idx, int user = -1);
  /// Variable index of every real coordinate of every user's beamformer, in
  /// [Re w_k; Im w_k] order; -1 marks a coordinate fixed at zero.
  void set_beam_layout(std::vector<std::vector<int>> layout);
  /// x_r - scale (c1 + lin' w_k - c4 sum_j |h_k^H w_j|^2) <= 0, where
  /// |h_k^H w_j|^2 = (g1' w_j)^2 + (g2' w_j)^2 in real coordinates.
  void add_rate(int user, int r_idx, double scale, double c1, double c4, VectorXd lin, VectorXd g1, VectorXd g2);
  /// (1 / (cbrt(x_m) - lambda) + 1 / (x_r - lambda)) / tau - 1 <= 0.
  void add_delay(int user, int mu_cubed_idx, int r_idx, double arrival, double qos);

  double objective(const VectorXd& x) const;
  /// Largest constraint value, +inf outside the delay domain.
  double max_violation(const VectorXd& x) const;
  bool strictly_feasible(const VectorXd& x) const { return max_violation(x) < 0; }

  BarrierResult solve(VectorXd x0, const BarrierOptions& opts = {}) const;

  /// -sum_i log(-f_i(x)) with gradient and Hessian; false outside the domain.
  bool log_barrier(const VectorXd& x, double& value, VectorXd* grad = nullptr, MatrixXd* hess = nullptr) const;

 private:
  struct Linear {
    std::vector<int> idx;
    std::vector<double> coef;
    double b;
    int user;
  };
  struct Cone {
    std::vector<int> idx;
    int t_idx;
    int user;
  };
  struct Rate {
    int user, r_idx;
    double scale, c1, c4;
    VectorXd lin, g1, g2;
  };
  struct Delay {
    int user, mu_idx, r_idx;
    double arrival, qos;
  };

  struct Workspace;

 public:
  struct Partition;

 private:
  bool evaluate(const VectorXd& x, double shift, bool derivs, double& value, Workspace& ws) const;
  void assemble(const VectorXd& x, int shift_idx, const std::vector<double>& wg, const std::vector<double>& wo,
                const std::vector<double>& wh, Workspace& ws) const;
  void assemble_barrier(const VectorXd& x, int shift_idx, Workspace& ws) const;
  std::vector<double> curvature(const VectorXd& x, const VectorXd& d) const;
  double initial_t(const VectorXd& g0, Workspace& ws, const Partition& part, double m,
                   const BarrierOptions& opts) const;
  std::vector<double> values(const VectorXd& x) const;
  std::vector<int> users_at(const VectorXd& x, double level) const;
  void lift_into_domain(VectorXd& x) const;
  BarrierResult phase_one(const VectorXd& x0, const BarrierOptions& opts) const;
  BarrierResult minimize(const VectorXd& x0, const VectorXd& c, const MatrixXd* Q, int shift_idx,
                         const BarrierOptions& opts, bool stop_when_negative) const;
  BarrierResult primal_dual(const VectorXd& x0, const BarrierOptions& opts) const;

  int n_;
  std::vector<Linear> linear_;
  std::vector<Cone> cones_;
  std::vector<Rate> rates_;
  std::vector<Delay> delays_;
  std::vector<std::vector<int>> layout_;
};

/// Fixed data of one continuous ADMM update.
struct ConvexSubproblem {
  const ScenarioConfig& cfg;
  const SurrogateCoeffs& coeffs;
  const ZBlock& z;
  const DualState& dual;
};

struct YSolveInfo {
  double objective = 0;  // y-dependent part of the augmented Lagrangian
  double gap = 0;
  int newton_steps = 0;
};

/// Minimizes the augmented Lagrangian over the continuous block subject to
/// the rate-surrogate, delay and power-cone constraints. RRH powers are
/// solved in closed form; the rest by the barrier method. Throws Infeasible
/// naming the users whose QoS cannot be met.
YBlock solve_y(const ConvexSubproblem& sub, const YBlock& warm_start, double tol = 1e-6,
               YSolveInfo* info = nullptr);

/// Independent reference: the RRH-power part of the y-update,
/// argmin_P G'(P) + gamma P + rho/2 (P - target)^2.
double prox_trade_cost(double target, double gamma, double rho, double harvested, double price_buy,
                       double price_sell);

struct TopologySolution {
  PrimalState state;
  double cost = 0;  // sum_n G'(P_n) + G'(P_e)
  int newton_steps = 0;
};

/// Solves the surrogate problem with the RRH activity pattern `b` held
/// fixed: every user may be served by every active RRH, inactive RRHs carry
/// no beamformer, power caps are enforced. Returns nullopt when the pattern
/// cannot meet the QoS targets.
std::optional<TopologySolution> solve_fixed_topology(const ScenarioConfig& cfg, const SurrogateCoeffs& coeffs,
                                                     const VectorXi& b, const YBlock* warm_start = nullptr,
                                                     double tol = 1e-8);

/// Internal rate unit of the solvers (bit/s). Rates are handled in Mbit/s
/// and compute cubes in (Mbit/s)^3 to keep the Newton systems well scaled.
inline constexpr double kRateUnit = 1e6;

}  // namespace gcran

#endif  // GCRAN_CONVEX_SOLVER_HPP
