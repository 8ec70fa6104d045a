#include "gcran/convex_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gcran/energy.hpp"

namespace gcran {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cholesky factor of D H D with D = diag(H)^{-1/2}; a growing ridge is added
// when H is numerically indefinite.
class ScaledCholesky {
 public:
  void compute(MatrixXd H) {
    const Index n = H.rows();
    scale_.resize(n);
    for (Index i = 0; i < n; ++i) scale_(i) = H(i, i) > 0 ? 1.0 / std::sqrt(H(i, i)) : 1.0;
    H = scale_.asDiagonal() * H * scale_.asDiagonal();
    double ridge = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      llt_.compute(H);
      if (llt_.info() == Eigen::Success) return;
      ridge = ridge == 0.0 ? 1e-12 : ridge * 100.0;
      H.diagonal().array() += ridge;
    }
    throw std::runtime_error("Newton system could not be factorized");
  }

  template <typename Rhs>
  MatrixXd solve(const Rhs& b) const {
    return scale_.asDiagonal() * llt_.solve(scale_.asDiagonal() * b);
  }

 private:
  VectorXd scale_;
  Eigen::LLT<MatrixXd> llt_;
};

}  // namespace

// Variables split into one block per user beamformer and a core holding the
// rest. Only rate constraints couple different blocks; their contributions
// are kept as rank-one terms and handled by a Woodbury update.
struct BarrierProgram::Partition {
  std::vector<int> block;  // -1 for core variables
  std::vector<int> local;
  std::vector<int> core;
  std::vector<std::vector<int>> blocks;

  Partition(const std::vector<std::vector<int>>& layout, Index n) : block(n, -1), local(n, -1) {
    for (std::size_t j = 0; j < layout.size(); ++j) {
      std::vector<int> vars;
      for (int v : layout[j]) {
        if (v < 0) continue;
        block[v] = static_cast<int>(blocks.size());
        local[v] = static_cast<int>(vars.size());
        vars.push_back(v);
      }
      if (!vars.empty()) blocks.push_back(std::move(vars));
    }
    for (Index i = 0; i < n; ++i) {
      if (block[i] < 0) {
        local[i] = static_cast<int>(core.size());
        core.push_back(static_cast<int>(i));
      }
    }
  }
};

struct BarrierProgram::Workspace {
  const Partition* part = nullptr;
  VectorXd grad;
  MatrixXd hc;                // core x core
  std::vector<MatrixXd> hb;   // block x block
  std::vector<MatrixXd> hbc;  // block x core
  std::vector<VectorXd> lr;   // rank-one terms w u u'
  std::vector<double> lr_w;

  // Per constraint, in catalog order: slack -(f_i - shift) > 0 and the
  // sparse gradient of f_i (recorded when derivatives are requested).
  std::vector<double> slack;
  std::vector<std::vector<int>> gi;
  std::vector<std::vector<double>> gv;
  std::vector<char> low_rank;
  std::vector<int> cur_i;
  std::vector<double> cur_v;

  void begin(bool derivs, std::size_t m) {
    slack.clear();
    if (!derivs) return;
    gi.resize(m);
    gv.resize(m);
    low_rank.assign(m, 0);
  }

  void record(double s, bool derivs, bool rank_one_term) {
    const std::size_t i = slack.size();
    slack.push_back(s);
    if (!derivs) return;
    gi[i] = cur_i;
    gv[i] = cur_v;
    low_rank[i] = rank_one_term;
  }

  void clear_matrices(Index n) {
    grad.setZero(n);
    hc.setZero(part->core.size(), part->core.size());
    hb.resize(part->blocks.size());
    hbc.resize(part->blocks.size());
    for (std::size_t j = 0; j < part->blocks.size(); ++j) {
      hb[j].setZero(part->blocks[j].size(), part->blocks[j].size());
      hbc[j].setZero(part->blocks[j].size(), part->core.size());
    }
    lr.clear();
    lr_w.clear();
  }

  // H(a, b) += v. Only the (block, core) orientation of mixed entries is
  // stored, so symmetric updates must visit both orientations.
  void add(int a, int b, double v) {
    const int ba = part->block[a], bb = part->block[b];
    const int la = part->local[a], lb = part->local[b];
    if (ba < 0 && bb < 0) {
      hc(la, lb) += v;
    } else if (ba >= 0 && bb < 0) {
      hbc[ba](la, lb) += v;
    } else if (ba >= 0 && ba == bb) {
      hb[ba](la, lb) += v;
    } else if (ba >= 0 && bb >= 0) {
      throw std::logic_error("constraint couples two beam blocks outside the low-rank path");
    }
  }

  // out += w grad(f_i - shift).
  void add_gradient(std::size_t i, double w, int shift_idx, VectorXd& out) const {
    for (std::size_t a = 0; a < gi[i].size(); ++a) out(gi[i][a]) += w * gv[i][a];
    if (shift_idx >= 0) out(shift_idx) -= w;
  }

  double directional(std::size_t i, int shift_idx, const VectorXd& d) const {
    double v = shift_idx >= 0 ? -d(shift_idx) : 0.0;
    for (std::size_t a = 0; a < gi[i].size(); ++a) v += gv[i][a] * d(gi[i][a]);
    return v;
  }

  void outer(std::size_t i, double w, int shift_idx) {
    const auto& idx = gi[i];
    const auto& val = gv[i];
    if (low_rank[i]) {
      VectorXd u = VectorXd::Zero(grad.size());
      for (std::size_t a = 0; a < idx.size(); ++a) u(idx[a]) += val[a];
      if (shift_idx >= 0) u(shift_idx) -= 1.0;
      lr.push_back(std::move(u));
      lr_w.push_back(w);
      return;
    }
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) add(idx[a], idx[b], w * val[a] * val[b]);
    if (shift_idx >= 0) {
      add(shift_idx, shift_idx, w);
      for (std::size_t a = 0; a < idx.size(); ++a) {
        add(idx[a], shift_idx, -w * val[a]);
        add(shift_idx, idx[a], -w * val[a]);
      }
    }
  }

  VectorXd apply(const VectorXd& v) const {
    const auto& core = part->core;
    VectorXd vc(core.size());
    for (std::size_t i = 0; i < core.size(); ++i) vc(i) = v(core[i]);
    VectorXd out = VectorXd::Zero(v.size());
    VectorXd oc = hc * vc;
    for (std::size_t j = 0; j < part->blocks.size(); ++j) {
      const auto& vars = part->blocks[j];
      VectorXd vj(vars.size());
      for (std::size_t i = 0; i < vars.size(); ++i) vj(i) = v(vars[i]);
      const VectorXd oj = hb[j] * vj + hbc[j] * vc;
      oc.noalias() += hbc[j].transpose() * vj;
      for (std::size_t i = 0; i < vars.size(); ++i) out(vars[i]) = oj(i);
    }
    for (std::size_t i = 0; i < core.size(); ++i) out(core[i]) = oc(i);
    for (std::size_t i = 0; i < lr.size(); ++i) out.noalias() += lr_w[i] * lr[i].dot(v) * lr[i];
    return out;
  }

  MatrixXd dense() const {
    const Index n = grad.size();
    MatrixXd H = MatrixXd::Zero(n, n);
    const auto& core = part->core;
    for (std::size_t a = 0; a < core.size(); ++a)
      for (std::size_t b = 0; b < core.size(); ++b) H(core[a], core[b]) = hc(a, b);
    for (std::size_t j = 0; j < part->blocks.size(); ++j) {
      const auto& vars = part->blocks[j];
      for (std::size_t a = 0; a < vars.size(); ++a) {
        for (std::size_t b = 0; b < vars.size(); ++b) H(vars[a], vars[b]) = hb[j](a, b);
        for (std::size_t b = 0; b < core.size(); ++b) {
          H(vars[a], core[b]) = hbc[j](a, b);
          H(core[b], vars[a]) = hbc[j](a, b);
        }
      }
    }
    for (std::size_t i = 0; i < lr.size(); ++i) H.noalias() += lr_w[i] * lr[i] * lr[i].transpose();
    return H;
  }
};

namespace {

// Factorization of the structured Newton matrix: block elimination of the
// beam blocks onto the core, then a Woodbury correction for rank-one terms.
class NewtonSystem {
 public:
  template <typename WS, typename Part>
  void factor(const WS& ws, const Part& part) {
    part_ = &part;
    const std::size_t nb = part.blocks.size();
    blocks_.resize(nb);
    elim_.resize(nb);
    hbc_ = &ws.hbc;
    MatrixXd S = ws.hc;
    for (std::size_t j = 0; j < nb; ++j) {
      blocks_[j].compute(ws.hb[j]);
      elim_[j] = blocks_[j].solve(ws.hbc[j]);
      S.noalias() -= ws.hbc[j].transpose() * elim_[j];
    }
    if (S.rows() > 0) core_.compute(S);

    const std::size_t r = ws.lr.size();
    Z_.resize(ws.grad.size(), static_cast<Index>(r));
    U_.resize(ws.grad.size(), static_cast<Index>(r));
    for (std::size_t i = 0; i < r; ++i) {
      U_.col(i) = ws.lr[i];
      Z_.col(i) = solve0(ws.lr[i]);
    }
    if (r > 0) {
      MatrixXd C = U_.transpose() * Z_;
      for (std::size_t i = 0; i < r; ++i) C(i, i) += 1.0 / ws.lr_w[i];
      cap_.compute(C);
    }
  }

  VectorXd solve(const VectorXd& b) const {
    VectorXd y = solve0(b);
    if (U_.cols() > 0) y -= Z_ * cap_.solve(U_.transpose() * y);
    return y;
  }

 private:
  VectorXd solve0(const VectorXd& b) const {
    const auto& part = *part_;
    VectorXd x(b.size());
    VectorXd rc(part.core.size());
    for (std::size_t i = 0; i < part.core.size(); ++i) rc(i) = b(part.core[i]);
    std::vector<VectorXd> yb(part.blocks.size());
    for (std::size_t j = 0; j < part.blocks.size(); ++j) {
      VectorXd bj(part.blocks[j].size());
      for (std::size_t i = 0; i < part.blocks[j].size(); ++i) bj(i) = b(part.blocks[j][i]);
      yb[j] = blocks_[j].solve(bj);
      rc.noalias() -= (*hbc_)[j].transpose() * yb[j];
    }
    VectorXd xc = rc.size() > 0 ? VectorXd(core_.solve(rc)) : rc;
    for (std::size_t i = 0; i < part.core.size(); ++i) x(part.core[i]) = xc(i);
    for (std::size_t j = 0; j < part.blocks.size(); ++j) {
      const VectorXd xj = yb[j] - elim_[j] * xc;
      for (std::size_t i = 0; i < part.blocks[j].size(); ++i) x(part.blocks[j][i]) = xj(i);
    }
    return x;
  }

  const BarrierProgram::Partition* part_ = nullptr;
  const std::vector<MatrixXd>* hbc_ = nullptr;
  std::vector<ScaledCholesky> blocks_;
  std::vector<MatrixXd> elim_;
  ScaledCholesky core_;
  ScaledCholesky cap_;
  MatrixXd U_, Z_;
};

// Solve with two rounds of iterative refinement against the assembled
// operator; the Woodbury step loses digits when barrier weights are large.
template <typename WS>
VectorXd refined_solve(const NewtonSystem& sys, const WS& ws, const VectorXd& b) {
  VectorXd x = sys.solve(b);
  for (int round = 0; round < 2; ++round) x += sys.solve(b - ws.apply(x));
  return x;
}

}  // namespace

BarrierProgram::BarrierProgram(int n_vars)
    : c(VectorXd::Zero(n_vars)), Q(MatrixXd::Zero(n_vars, n_vars)), n_(n_vars) {}

int BarrierProgram::constraint_count() const {
  return static_cast<int>(linear_.size() + cones_.size() + rates_.size() + delays_.size());
}

void BarrierProgram::add_linear(std::vector<int> idx, std::vector<double> coef, double b, int user) {
  require(idx.size() == coef.size(), "linear constraint: index/coefficient size mismatch");
  linear_.push_back({std::move(idx), std::move(coef), b, user});
}

void BarrierProgram::add_cone(std::vector<int> idx, int t_idx, int user) {
  cones_.push_back({std::move(idx), t_idx, user});
}

void BarrierProgram::set_beam_layout(std::vector<std::vector<int>> layout) { layout_ = std::move(layout); }

void BarrierProgram::add_rate(int user, int r_idx, double scale, double c1, double c4, VectorXd lin, VectorXd g1,
                              VectorXd g2) {
  require(user >= 0 && static_cast<std::size_t>(user) < layout_.size(), "rate constraint: set the beam layout first");
  rates_.push_back({user, r_idx, scale, c1, c4, std::move(lin), std::move(g1), std::move(g2)});
}

void BarrierProgram::add_delay(int user, int mu_cubed_idx, int r_idx, double arrival, double qos) {
  delays_.push_back({user, mu_cubed_idx, r_idx, arrival, qos});
}

double BarrierProgram::objective(const VectorXd& x) const {
  return c.dot(x.head(n_)) + 0.5 * x.head(n_).dot(Q * x.head(n_)) + offset;
}

std::vector<double> BarrierProgram::values(const VectorXd& x) const {
  std::vector<double> f;
  f.reserve(constraint_count());
  for (const auto& l : linear_) {
    double v = l.b;
    for (std::size_t i = 0; i < l.idx.size(); ++i) v += l.coef[i] * x(l.idx[i]);
    f.push_back(v);
  }
  for (const auto& cn : cones_) {
    double v = -x(cn.t_idx);
    for (int i : cn.idx) v += x(i) * x(i);
    f.push_back(v);
  }
  for (const auto& rc : rates_) {
    double interference = 0.0, lin = 0.0;
    for (std::size_t j = 0; j < layout_.size(); ++j) {
      double z1 = 0.0, z2 = 0.0;
      const auto& lay = layout_[j];
      for (std::size_t cpt = 0; cpt < lay.size(); ++cpt) {
        if (lay[cpt] < 0) continue;
        const double xv = x(lay[cpt]);
        z1 += rc.g1(cpt) * xv;
        z2 += rc.g2(cpt) * xv;
        if (static_cast<int>(j) == rc.user) lin += rc.lin(cpt) * xv;
      }
      interference += z1 * z1 + z2 * z2;
    }
    f.push_back(x(rc.r_idx) - rc.scale * (rc.c1 + lin - rc.c4 * interference));
  }
  for (const auto& d : delays_) {
    const double q = std::cbrt(x(d.mu_idx));
    const double r = x(d.r_idx);
    if (!(q > d.arrival) || !(r > d.arrival)) {
      f.push_back(kInf);
    } else {
      f.push_back((1.0 / (q - d.arrival) + 1.0 / (r - d.arrival)) / d.qos - 1.0);
    }
  }
  return f;
}

double BarrierProgram::max_violation(const VectorXd& x) const {
  const auto f = values(x);
  double m = -kInf;
  for (double v : f) m = std::max(m, v);
  return f.empty() ? -kInf : m;
}

std::vector<int> BarrierProgram::users_at(const VectorXd& x, double level) const {
  const auto f = values(x);
  std::vector<int> users;
  std::size_t i = 0;
  auto visit = [&](int user) {
    if (user >= 0 && f[i] >= level) users.push_back(user);
    ++i;
  };
  for (const auto& l : linear_) visit(l.user);
  for (const auto& cn : cones_) visit(cn.user);
  for (const auto& rc : rates_) visit(rc.user);
  for (const auto& d : delays_) visit(d.user);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  return users;
}

bool BarrierProgram::evaluate(const VectorXd& x, double shift, bool derivs, double& value, Workspace& ws) const {
  ws.begin(derivs, static_cast<std::size_t>(constraint_count()));
  value = 0.0;
  auto term = [&](double f, bool low_rank) {
    const double slack = shift - f;
    if (!(slack > 0.0)) return false;
    value -= std::log(slack);
    ws.record(slack, derivs, low_rank);
    return true;
  };

  for (const auto& l : linear_) {
    double f = l.b;
    for (std::size_t i = 0; i < l.idx.size(); ++i) f += l.coef[i] * x(l.idx[i]);
    if (derivs) {
      ws.cur_i = l.idx;
      ws.cur_v = l.coef;
    }
    if (!term(f, false)) return false;
  }

  for (const auto& cn : cones_) {
    double f = -x(cn.t_idx);
    for (int i : cn.idx) f += x(i) * x(i);
    if (derivs) {
      ws.cur_i.clear();
      ws.cur_v.clear();
      for (int i : cn.idx) {
        ws.cur_i.push_back(i);
        ws.cur_v.push_back(2.0 * x(i));
      }
      ws.cur_i.push_back(cn.t_idx);
      ws.cur_v.push_back(-1.0);
    }
    if (!term(f, false)) return false;
  }

  const std::size_t users = layout_.size();
  std::vector<double> z1(users), z2(users);
  for (const auto& rc : rates_) {
    double interference = 0.0, lin = 0.0;
    for (std::size_t j = 0; j < users; ++j) {
      z1[j] = z2[j] = 0.0;
      const auto& lay = layout_[j];
      for (std::size_t cpt = 0; cpt < lay.size(); ++cpt) {
        if (lay[cpt] < 0) continue;
        const double xv = x(lay[cpt]);
        z1[j] += rc.g1(cpt) * xv;
        z2[j] += rc.g2(cpt) * xv;
        if (static_cast<int>(j) == rc.user) lin += rc.lin(cpt) * xv;
      }
      interference += z1[j] * z1[j] + z2[j] * z2[j];
    }
    const double f = x(rc.r_idx) - rc.scale * (rc.c1 + lin - rc.c4 * interference);
    if (derivs) {
      ws.cur_i.assign(1, rc.r_idx);
      ws.cur_v.assign(1, 1.0);
      const double q = 2.0 * rc.scale * rc.c4;
      for (std::size_t j = 0; j < users; ++j) {
        const auto& lay = layout_[j];
        for (std::size_t cpt = 0; cpt < lay.size(); ++cpt) {
          if (lay[cpt] < 0) continue;
          double gval = q * (z1[j] * rc.g1(cpt) + z2[j] * rc.g2(cpt));
          if (static_cast<int>(j) == rc.user) gval -= rc.scale * rc.lin(cpt);
          ws.cur_i.push_back(lay[cpt]);
          ws.cur_v.push_back(gval);
        }
      }
    }
    if (!term(f, true)) return false;
  }

  for (const auto& dl : delays_) {
    const double q = std::cbrt(x(dl.mu_idx));
    const double r = x(dl.r_idx);
    if (!(q > dl.arrival) || !(r > dl.arrival)) return false;
    const double eq = q - dl.arrival, er = r - dl.arrival;
    const double f = (1.0 / eq + 1.0 / er) / dl.qos - 1.0;
    if (derivs) {
      ws.cur_i = {dl.mu_idx, dl.r_idx};
      ws.cur_v = {-1.0 / (3.0 * q * q) / (eq * eq) / dl.qos, -1.0 / (er * er) / dl.qos};
    }
    if (!term(f, false)) return false;
  }
  return true;
}

void BarrierProgram::assemble(const VectorXd& x, int shift_idx, const std::vector<double>& wg,
                              const std::vector<double>& wo, const std::vector<double>& wh, Workspace& ws) const {
  ws.clear_matrices(x.size());
  for (std::size_t i = 0; i < ws.slack.size(); ++i) {
    ws.add_gradient(i, wg[i], shift_idx, ws.grad);
    ws.outer(i, wo[i], shift_idx);
  }

  // Curvature of the constraint functions themselves.
  std::size_t i = linear_.size();
  for (const auto& cn : cones_) {
    for (int v : cn.idx) ws.add(v, v, 2.0 * wh[i]);
    ++i;
  }
  for (const auto& rc : rates_) {
    if (rc.c4 > 0.0) {
      const double q = 2.0 * rc.scale * rc.c4 * wh[i];
      for (const auto& lay : layout_) {
        for (std::size_t a = 0; a < lay.size(); ++a) {
          if (lay[a] < 0) continue;
          for (std::size_t b = 0; b < lay.size(); ++b) {
            if (lay[b] < 0) continue;
            ws.add(lay[a], lay[b], q * (rc.g1(a) * rc.g1(b) + rc.g2(a) * rc.g2(b)));
          }
        }
      }
    }
    ++i;
  }
  for (const auto& dl : delays_) {
    const double q = std::cbrt(x(dl.mu_idx));
    const double eq = q - dl.arrival, er = x(dl.r_idx) - dl.arrival;
    const double dq = 1.0 / (3.0 * q * q);
    const double d2q = -2.0 / (9.0 * q * q * q * q * q);
    ws.add(dl.mu_idx, dl.mu_idx, wh[i] * (2.0 * dq * dq / (eq * eq * eq) - d2q / (eq * eq)) / dl.qos);
    ws.add(dl.r_idx, dl.r_idx, wh[i] * 2.0 / (er * er * er) / dl.qos);
    ++i;
  }
}

std::vector<double> BarrierProgram::curvature(const VectorXd& x, const VectorXd& d) const {
  std::vector<double> out(linear_.size(), 0.0);
  out.reserve(constraint_count());
  for (const auto& cn : cones_) {
    double v = 0.0;
    for (int i : cn.idx) v += d(i) * d(i);
    out.push_back(v);
  }
  for (const auto& rc : rates_) {
    double v = 0.0;
    for (const auto& lay : layout_) {
      double z1 = 0.0, z2 = 0.0;
      for (std::size_t cpt = 0; cpt < lay.size(); ++cpt) {
        if (lay[cpt] < 0) continue;
        z1 += rc.g1(cpt) * d(lay[cpt]);
        z2 += rc.g2(cpt) * d(lay[cpt]);
      }
      v += z1 * z1 + z2 * z2;
    }
    out.push_back(rc.scale * rc.c4 * v);
  }
  for (const auto& dl : delays_) {
    const double q = std::cbrt(x(dl.mu_idx));
    const double eq = q - dl.arrival, er = x(dl.r_idx) - dl.arrival;
    const double dq = 1.0 / (3.0 * q * q);
    const double d2q = -2.0 / (9.0 * q * q * q * q * q);
    const double hm = (2.0 * dq * dq / (eq * eq * eq) - d2q / (eq * eq)) / dl.qos;
    const double hr = 2.0 / (er * er * er) / dl.qos;
    out.push_back(0.5 * (hm * d(dl.mu_idx) * d(dl.mu_idx) + hr * d(dl.r_idx) * d(dl.r_idx)));
  }
  return out;
}

void BarrierProgram::assemble_barrier(const VectorXd& x, int shift_idx, Workspace& ws) const {
  std::vector<double> d(ws.slack.size()), d2(ws.slack.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = 1.0 / ws.slack[i];
    d2[i] = d[i] * d[i];
  }
  assemble(x, shift_idx, d, d2, d, ws);
}

bool BarrierProgram::log_barrier(const VectorXd& x, double& value, VectorXd* grad, MatrixXd* hess) const {
  const Partition part(layout_, x.size());
  Workspace ws;
  ws.part = &part;
  const bool derivs = grad || hess;
  if (!evaluate(x, 0.0, derivs, value, ws)) return false;
  if (!derivs) return true;
  assemble_barrier(x, -1, ws);
  if (grad) *grad = ws.grad;
  if (hess) *hess = ws.dense();
  return true;
}

void BarrierProgram::lift_into_domain(VectorXd& x) const {
  for (const auto& d : delays_) {
    const double floor = d.arrival + std::max(1.0, std::abs(d.arrival));
    if (!(std::cbrt(x(d.mu_idx)) > d.arrival)) x(d.mu_idx) = floor * floor * floor;
    if (!(x(d.r_idx) > d.arrival)) x(d.r_idx) = floor;
  }
}

namespace {

// Sparse copy of the quadratic objective term.
class SparseQuadratic {
 public:
  SparseQuadratic(const MatrixXd* Q, Index rows) {
    if (!Q) return;
    for (Index j = 0; j < std::min(rows, Q->cols()); ++j)
      for (Index i = 0; i < std::min(rows, Q->rows()); ++i)
        if ((*Q)(i, j) != 0.0) entries_.push_back({static_cast<int>(i), static_cast<int>(j), (*Q)(i, j)});
  }

  VectorXd times(const VectorXd& v) const {
    VectorXd out = VectorXd::Zero(v.size());
    for (const auto& e : entries_) out(e.i) += e.v * v(e.j);
    return out;
  }

  template <typename WS>
  void add_to(WS& ws, double scale) const {
    for (const auto& e : entries_) ws.add(e.i, e.j, scale * e.v);
  }

 private:
  struct Entry {
    int i, j;
    double v;
  };
  std::vector<Entry> entries_;
};

}  // namespace

double BarrierProgram::initial_t(const VectorXd& g0, Workspace& ws, const Partition& part, double m,
                                 const BarrierOptions& opts) const {
  // Least-squares fit of t g0 + grad(phi) = 0 in the barrier metric.
  NewtonSystem sys;
  sys.factor(ws, part);
  const VectorXd y = sys.solve(g0);
  const double den = g0.dot(y);
  double t = den > 0 ? -ws.grad.dot(y) / den : 1.0;
  if (!std::isfinite(t)) t = 1.0;
  return std::clamp(t, 1e-2, m / opts.tol);
}

BarrierResult BarrierProgram::minimize(const VectorXd& x0, const VectorXd& cvec, const MatrixXd* Qm, int shift_idx,
                                       const BarrierOptions& opts, bool stop_when_negative) const {
  BarrierResult res;
  VectorXd x = x0;
  const Index nx = x.size();
  const double m = std::max(1, constraint_count());
  const Partition part(layout_, nx);
  Workspace ws, trial;
  ws.part = trial.part = &part;
  NewtonSystem sys;
  const SparseQuadratic quad(Qm, n_);

  auto shift_of = [&](const VectorXd& v) { return shift_idx >= 0 ? v(shift_idx) : 0.0; };
  auto obj_grad = [&](const VectorXd& v) -> VectorXd {
    VectorXd g = quad.times(v);
    g.head(cvec.size()) += cvec;
    return g;
  };

  double phi = 0.0;
  if (!evaluate(x, shift_of(x), true, phi, ws)) {
    res.status = BarrierStatus::Infeasible;
    res.x = x;
    return res;
  }
  assemble_barrier(x, shift_idx, ws);
  double t = opts.t0 > 0.0 ? opts.t0 : initial_t(obj_grad(x), ws, part, m, opts);

  for (;;) {
    for (int it = 0; it < opts.max_centering; ++it) {
      if (!evaluate(x, shift_of(x), true, phi, ws)) {
        res.status = BarrierStatus::Infeasible;
        res.x = x;
        return res;
      }
      assemble_barrier(x, shift_idx, ws);
      const VectorXd g0 = obj_grad(x);
      const VectorXd g = t * g0 + ws.grad;
      quad.add_to(ws, t);
      sys.factor(ws, part);
      const VectorXd dx = -refined_solve(sys, ws, g);
      const double lam2 = -g.dot(dx);
      if (!(lam2 > 2.0 * opts.newton_tol)) break;

      // Backtracking on t f0 + phi; the barrier change is accumulated term by
      // term so that it stays accurate when t f0 is large.
      const double q_dd = dx.dot(quad.times(dx));
      const double g0d = g0.dot(dx);
      const double gd = g.dot(dx);
      double step = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, step *= opts.backtrack) {
        const VectorXd xn = x + step * dx;
        double phin = 0.0;
        if (!evaluate(xn, shift_of(xn), false, phin, trial)) continue;
        double dphi = 0.0;
        for (std::size_t i = 0; i < ws.slack.size(); ++i) dphi += std::log(ws.slack[i] / trial.slack[i]);
        const double df = t * (step * g0d + 0.5 * step * step * q_dd) + dphi;
        if (df <= opts.armijo * step * gd) {
          x = xn;
          accepted = true;
          break;
        }
      }
      ++res.newton_steps;
      if (!accepted) break;
      if (stop_when_negative && shift_of(x) < 0.0) {
        res.x = x;
        res.status = BarrierStatus::Optimal;
        res.gap = m / t;
        return res;
      }
      if (res.newton_steps >= opts.max_newton) break;
    }
    res.gap = m / t;
    if (res.gap < opts.tol) {
      res.status = BarrierStatus::Optimal;
      break;
    }
    if (res.newton_steps >= opts.max_newton) {
      res.status = BarrierStatus::IterationLimit;
      break;
    }
    t *= opts.t_growth;
  }
  res.x = x;
  return res;
}

BarrierResult BarrierProgram::primal_dual(const VectorXd& x0, const BarrierOptions& opts) const {
  BarrierResult res;
  VectorXd x = x0;
  const Index nx = x.size();
  const Partition part(layout_, nx);
  Workspace ws, trial;
  ws.part = trial.part = &part;
  NewtonSystem sys;
  const SparseQuadratic quad(&Q, n_);
  auto obj_grad = [&](const VectorXd& v) -> VectorXd { return c + quad.times(v); };

  double phi = 0.0;
  if (!evaluate(x, 0.0, true, phi, ws)) {
    res.status = BarrierStatus::Infeasible;
    res.x = x;
    return res;
  }
  const std::size_t m = ws.slack.size();
  if (m == 0) {
    // Unconstrained quadratic.
    ws.clear_matrices(nx);
    quad.add_to(ws, 1.0);
    sys.factor(ws, part);
    res.x = x - sys.solve(obj_grad(x));
    res.status = BarrierStatus::Optimal;
    ++res.newton_steps;
    return res;
  }

  // Multipliers start on the central path point of the fitted t.
  assemble_barrier(x, -1, ws);
  const double t_start = opts.t0 > 0.0 ? opts.t0 : initial_t(obj_grad(x), ws, part, static_cast<double>(m), opts);
  VectorXd lam(m);
  for (std::size_t i = 0; i < m; ++i) lam(i) = 1.0 / (t_start * ws.slack[i]);

  // r = [g0 + sum lam_i grad f_i; lam_i s_i - 1/t].
  auto residual = [&](const Workspace& w, const VectorXd& xv, const VectorXd& l, double t, VectorXd& rd) {
    rd = obj_grad(xv);
    for (std::size_t i = 0; i < m; ++i) w.add_gradient(i, l(i), -1, rd);
    double cent = 0.0;
    for (std::size_t i = 0; i < m; ++i) cent += std::pow(l(i) * w.slack[i] - 1.0 / t, 2);
    return std::sqrt(rd.squaredNorm() + cent);
  };

  std::vector<double> wg(m), wo(m), wh(m);
  VectorXd rd, rd_new;
  int stalled = 0;
  for (;;) {
    double eta = 0.0;
    for (std::size_t i = 0; i < m; ++i) eta += lam(i) * ws.slack[i];
    const VectorXd g0 = obj_grad(x);
    residual(ws, x, lam, 1.0, rd);
    res.gap = eta;
    if (eta < opts.tol && rd.norm() <= opts.feas_tol * (1.0 + g0.norm())) {
      res.status = BarrierStatus::Optimal;
      break;
    }
    if (res.newton_steps >= opts.max_newton) {
      res.status = BarrierStatus::IterationLimit;
      break;
    }
    const double t = opts.t_growth * static_cast<double>(m) / eta;

    for (std::size_t i = 0; i < m; ++i) {
      wg[i] = 1.0 / (t * ws.slack[i]);
      wo[i] = lam(i) / ws.slack[i];
      wh[i] = lam(i);
    }
    assemble(x, -1, wg, wo, wh, ws);
    quad.add_to(ws, 1.0);
    sys.factor(ws, part);
    VectorXd dx = -refined_solve(sys, ws, VectorXd(g0 + ws.grad));

    // Second-order correction: the predicted curvature of every constraint
    // along dx enters the linearized complementarity condition.
    const std::vector<double> curv = curvature(x, dx);
    std::vector<double> shift(m);
    VectorXd rhs = g0 + ws.grad;
    for (std::size_t i = 0; i < m; ++i) {
      shift[i] = wo[i] * curv[i];
      ws.add_gradient(i, shift[i], -1, rhs);
    }
    dx = -refined_solve(sys, ws, rhs);

    VectorXd dlam(m);
    double step = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      dlam(i) = wg[i] + shift[i] - lam(i) + wo[i] * ws.directional(i, -1, dx);
      if (dlam(i) < 0.0) step = std::min(step, -lam(i) / dlam(i));
    }
    step = std::min(1.0, 0.99 * step);

    const double r_norm = residual(ws, x, lam, t, rd);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= opts.backtrack) {
      const VectorXd xn = x + step * dx;
      double phin = 0.0;
      if (!evaluate(xn, 0.0, true, phin, trial)) continue;
      const VectorXd ln = lam + step * dlam;
      if (residual(trial, xn, ln, t, rd_new) <= (1.0 - 0.01 * step) * r_norm) {
        x = xn;
        lam = ln;
        std::swap(ws, trial);
        accepted = true;
        break;
      }
    }
    ++res.newton_steps;
    // Tiny steps mean the iterate sits at the numerical floor of the
    // problem; accept it when the gap is close to the target.
    stalled = accepted && step < 1e-4 ? stalled + 1 : 0;
    if (!accepted || stalled >= 5) {
      res.status = eta < 100.0 * opts.tol ? BarrierStatus::Optimal : BarrierStatus::IterationLimit;
      break;
    }
  }
  res.x = x;
  return res;
}

BarrierResult BarrierProgram::phase_one(const VectorXd& x0, const BarrierOptions& opts) const {
  VectorXd xs(n_ + 1);
  xs.head(n_) = x0;
  lift_into_domain(xs);
  const double worst = max_violation(xs.head(n_));
  xs(n_) = worst + std::max(1.0, std::abs(worst));

  // A small multiple of the original objective keeps the auxiliary problem
  // bounded in directions the constraints leave free.
  const double eps = 1e-3 / (1.0 + c.lpNorm<Eigen::Infinity>() + Q.lpNorm<Eigen::Infinity>());
  VectorXd cs(n_ + 1);
  cs << eps * c, 1.0;
  const MatrixXd Qs = eps * Q;
  BarrierOptions p1 = opts;
  p1.t0 = 1.0;
  BarrierResult r = minimize(xs, cs, &Qs, n_, p1, true);
  BarrierResult out;
  out.newton_steps = r.newton_steps;
  if (r.status == BarrierStatus::Optimal && r.x(n_) < 0.0) {
    out.x = r.x.head(n_);
    out.status = BarrierStatus::Optimal;
    return out;
  }
  out.x = r.x.head(n_);
  out.status = BarrierStatus::Infeasible;
  const double s = r.x(n_);
  out.binding_users = users_at(out.x, s - 1e-6 * (1.0 + std::abs(s)));
  return out;
}

BarrierResult BarrierProgram::solve(VectorXd x0, const BarrierOptions& opts) const {
  require(x0.size() == n_, "starting point has the wrong size");
  int extra_steps = 0;
  if (!strictly_feasible(x0)) {
    BarrierResult p1 = phase_one(x0, opts);
    if (p1.status != BarrierStatus::Optimal) return p1;
    x0 = p1.x;
    extra_steps = p1.newton_steps;
  }
  BarrierResult r = primal_dual(x0, opts);
  r.newton_steps += extra_steps;
  r.objective = objective(r.x);
  return r;
}

// ---------------------------------------------------------------------------

double prox_trade_cost(double target, double gamma, double rho, double harvested, double price_buy,
                       double price_sell) {
  const double above = target - (price_buy + gamma) / rho;
  if (above > harvested) return above;
  const double below = target - (price_sell + gamma) / rho;
  if (below < harvested) return below;
  return harvested;
}

namespace {

// Real coordinates of the user-k channel used by the rate constraints.
struct RealChannel {
  VectorXd g1, g2;
};

RealChannel real_channel(const SurrogateCoeffs& coeffs, Index k) {
  const Index d = coeffs.h.cols();
  RealChannel rc{VectorXd(2 * d), VectorXd(2 * d)};
  const auto hr = coeffs.h.row(k).real().transpose();
  const auto hi = coeffs.h.row(k).imag().transpose();
  rc.g1 << hr, hi;
  rc.g2 << -hi, hr;
  return rc;
}

// Re(c2_k w_k) as a linear form in [Re w_k; Im w_k].
VectorXd linear_rate_term(const SurrogateCoeffs& coeffs, Index k) {
  const Index d = coeffs.h.cols();
  VectorXd lin(2 * d);
  lin << coeffs.c2.row(k).real().transpose(), -coeffs.c2.row(k).imag().transpose();
  return lin;
}

void add_rate_and_delay(BarrierProgram& prog, const ScenarioConfig& cfg, const SurrogateCoeffs& coeffs,
                        int mu_off, int r_off) {
  const double scale = cfg.bandwidth_hz / kRateUnit / std::numbers::ln2;
  for (int k = 0; k < cfg.n_users; ++k) {
    const RealChannel rc = real_channel(coeffs, k);
    prog.add_rate(k, r_off + k, scale, coeffs.c1(k), coeffs.c4(k), linear_rate_term(coeffs, k), rc.g1, rc.g2);
    prog.add_delay(k, mu_off + k, r_off + k, cfg.arrival_rates(k) / kRateUnit, cfg.delay_qos(k) * kRateUnit);
  }
}

void write_beams(VectorXd& x, const std::vector<std::vector<int>>& layout, const MatrixXcd& w) {
  const Index d = w.rows();
  for (std::size_t j = 0; j < layout.size(); ++j) {
    for (Index cpt = 0; cpt < 2 * d; ++cpt) {
      const int v = layout[j][cpt];
      if (v < 0) continue;
      x(v) = cpt < d ? w(cpt, j).real() : w(cpt - d, j).imag();
    }
  }
}

MatrixXcd read_beams(const VectorXd& x, const std::vector<std::vector<int>>& layout, Index d) {
  MatrixXcd w = MatrixXcd::Zero(d, static_cast<Index>(layout.size()));
  for (std::size_t j = 0; j < layout.size(); ++j) {
    for (Index cpt = 0; cpt < d; ++cpt) {
      const int vr = layout[j][cpt], vi = layout[j][cpt + d];
      w(cpt, j) = {vr >= 0 ? x(vr) : 0.0, vi >= 0 ? x(vi) : 0.0};
    }
  }
  return w;
}

constexpr double kRate3 = kRateUnit * kRateUnit * kRateUnit;

// Moves a warm-start (rate, compute) pair off the rate bound, raising the
// compute capacity so that the delay bound keeps (or gains) slack. Values in
// solver units. Pairs outside the delay domain are left to phase I.
void pull_inside(double& r, double& mu_cubed, double arrival, double qos) {
  const double q = std::cbrt(mu_cubed);
  if (!(r > arrival) || !(q > arrival)) return;
  const double delay = 1.0 / (q - arrival) + 1.0 / (r - arrival);
  const double r_new = arrival + (1.0 - 1e-3) * (r - arrival);
  const double room = std::min(delay, qos) * (1.0 - 1e-3) - 1.0 / (r_new - arrival);
  if (!(room > 0.0)) return;
  const double q_new = std::max(q, arrival + 1.0 / room);
  r = r_new;
  mu_cubed = q_new * q_new * q_new;
}

}  // namespace

YBlock solve_y(const ConvexSubproblem& sub, const YBlock& warm, double tol, YSolveInfo* info) {
  const ScenarioConfig& cfg = sub.cfg;
  const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;
  const int NK = N * K;
  const Index D = static_cast<Index>(N) * L;
  const double rho = sub.dual.rho;
  const VectorXd& gamma = sub.dual.gamma;
  require(gamma.size() == NK + N + 1, "dual vector has the wrong length");
  require(rho > 0, "penalty parameter must be positive");
  const auto prices = TradePrices<double>::from(cfg.price_buy, cfg.price_sell);
  const double kc = cfg.compute_coeff * kRate3;
  const int active = sub.z.b.sum();

  // Layout: [P_e, s_e, mu'(K), r(K), t(NK), w].
  const int i_pe = 0, i_se = 1, i_mu = 2, i_r = 2 + K, i_t = 2 + 2 * K, i_w = 2 + 2 * K + NK;
  const int n = i_w + 2 * K * static_cast<int>(D);
  BarrierProgram prog(n);

  std::vector<std::vector<int>> layout(K, std::vector<int>(2 * D));
  for (int j = 0; j < K; ++j)
    for (Index cpt = 0; cpt < 2 * D; ++cpt) layout[j][cpt] = i_w + j * 2 * static_cast<int>(D) + static_cast<int>(cpt);
  prog.set_beam_layout(layout);

  // Objective: G'(P_e) via epigraph + multiplier and penalty terms of the
  // cloud row and of the t = x rows.
  const double gamma_e = gamma(N + NK);
  const double row_const = cfg.backhaul_power * active;
  prog.c(i_se) += prices.psi;
  prog.c(i_pe) += prices.phi + gamma_e;
  prog.offset -= prices.phi * cfg.harvested_cloud;
  VectorXd drow = VectorXd::Zero(n);
  drow(i_pe) = 1.0;
  for (int k = 0; k < K; ++k) {
    drow(i_mu + k) = -kc;
    prog.c(i_mu + k) -= gamma_e * kc;
  }
  prog.Q.noalias() += rho * drow * drow.transpose();
  prog.c -= rho * row_const * drow;
  prog.offset += 0.5 * rho * row_const * row_const;
  for (int nk = 0; nk < NK; ++nk) {
    const double xv = sub.z.x(nk);
    prog.Q(i_t + nk, i_t + nk) += rho;
    prog.c(i_t + nk) += gamma(N + nk) - rho * xv;
    prog.offset += 0.5 * rho * xv * xv;
  }

  prog.add_linear({i_pe, i_se}, {1.0, -1.0}, -cfg.harvested_cloud);
  prog.add_linear({i_pe, i_se}, {-1.0, -1.0}, cfg.harvested_cloud);
  add_rate_and_delay(prog, cfg, sub.coeffs, i_mu, i_r);
  for (int nn = 0; nn < N; ++nn) {
    for (int k = 0; k < K; ++k) {
      std::vector<int> idx;
      for (int l = 0; l < L; ++l) {
        idx.push_back(layout[k][nn * L + l]);
        idx.push_back(layout[k][D + nn * L + l]);
      }
      prog.add_cone(std::move(idx), i_t + nn * K + k, k);
    }
  }

  // Warm start, pushed strictly inside the cones.
  VectorXd x0 = VectorXd::Zero(n);
  x0(i_pe) = warm.p_cloud;
  x0(i_se) = std::abs(warm.p_cloud - cfg.harvested_cloud) + 0.1 * (1.0 + std::abs(warm.p_cloud - cfg.harvested_cloud));
  for (int k = 0; k < K; ++k) {
    x0(i_mu + k) = warm.mu_cubed(k) / kRate3;
    x0(i_r + k) = warm.r(k) / kRateUnit;
    pull_inside(x0(i_r + k), x0(i_mu + k), cfg.arrival_rates(k) / kRateUnit, cfg.delay_qos(k) * kRateUnit);
  }
  write_beams(x0, layout, warm.w);
  for (int nn = 0; nn < N; ++nn) {
    for (int k = 0; k < K; ++k) {
      const double pw = beam_block(warm.w, nn, k, L).squaredNorm();
      x0(i_t + nn * K + k) = std::max(warm.t(nn * K + k), pw * 1.1 + 1e-4);
    }
  }

  BarrierOptions opts;
  opts.tol = tol;
  const BarrierResult res = prog.solve(x0, opts);
  if (res.status == BarrierStatus::Infeasible) {
    throw Infeasible("continuous update infeasible: delay targets cannot be met", res.binding_users);
  }

  YBlock y;
  y.p_cloud = res.x(i_pe);
  y.mu_cubed = res.x.segment(i_mu, K) * kRate3;
  y.r = res.x.segment(i_r, K) * kRateUnit;
  y.t = res.x.segment(i_t, NK);
  y.w = read_beams(res.x, layout, D);
  y.p.resize(N);
  double p_obj = 0.0;
  for (int nn = 0; nn < N; ++nn) {
    const double target = cfg.amp_inefficiency(nn) * sub.z.x.segment(nn * K, K).sum();
    const double pn = prox_trade_cost(target, gamma(nn), rho, cfg.harvested_rrh(nn), cfg.price_buy, cfg.price_sell);
    y.p(nn) = pn;
    p_obj += trade_cost_convex(pn, cfg.harvested_rrh(nn), prices) + gamma(nn) * pn +
             0.5 * rho * (pn - target) * (pn - target);
  }
  if (info) {
    info->objective = res.objective + p_obj;
    info->gap = res.gap;
    info->newton_steps = res.newton_steps;
  }
  return y;
}

std::optional<TopologySolution> solve_fixed_topology(const ScenarioConfig& cfg, const SurrogateCoeffs& coeffs,
                                                     const VectorXi& b, const YBlock* warm, double tol) {
  const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;
  const Index D = static_cast<Index>(N) * L;
  require(b.size() == N, "activity pattern has the wrong length");
  std::vector<int> on;
  for (int n = 0; n < N; ++n)
    if (b(n)) on.push_back(n);
  require(!on.empty(), "at least one RRH must be active");
  const int M = static_cast<int>(on.size());
  const auto prices = TradePrices<double>::from(cfg.price_buy, cfg.price_sell);
  const double kc = cfg.compute_coeff * kRate3;

  // Layout: [s_n (M), s_e, mu'(K), r(K), t(M K), w over active RRHs].
  const int i_sn = 0, i_se = M, i_mu = M + 1, i_r = M + 1 + K, i_t = M + 1 + 2 * K, i_w = i_t + M * K;
  const int n = i_w + 2 * K * M * L;
  BarrierProgram prog(n);

  std::vector<std::vector<int>> layout(K, std::vector<int>(2 * D, -1));
  int next = i_w;
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < M; ++j) {
      for (int l = 0; l < L; ++l) {
        layout[k][on[j] * L + l] = next++;
        layout[k][D + on[j] * L + l] = next++;
      }
    }
  }
  prog.set_beam_layout(layout);

  const double cloud_const = cfg.backhaul_power * M;
  for (int n2 = 0; n2 < N; ++n2) {
    if (!b(n2)) prog.offset += trade_cost_convex(0.0, cfg.harvested_rrh(n2), prices);
  }
  prog.c(i_se) = prices.psi;
  prog.offset += prices.phi * (cloud_const - cfg.harvested_cloud);
  for (int k = 0; k < K; ++k) prog.c(i_mu + k) = prices.phi * kc;

  for (int j = 0; j < M; ++j) {
    const int nn = on[j];
    const double lam = cfg.amp_inefficiency(nn);
    prog.c(i_sn + j) = prices.psi;
    prog.offset -= prices.phi * cfg.harvested_rrh(nn);
    std::vector<int> idx_t;
    for (int k = 0; k < K; ++k) {
      idx_t.push_back(i_t + j * K + k);
      prog.c(i_t + j * K + k) = prices.phi * lam;
    }
    std::vector<int> idx = idx_t;
    idx.push_back(i_sn + j);
    std::vector<double> up(K, lam), dn(K, -lam);
    up.push_back(-1.0);
    dn.push_back(-1.0);
    prog.add_linear(idx, up, -cfg.harvested_rrh(nn));
    prog.add_linear(idx, dn, cfg.harvested_rrh(nn));
    prog.add_linear(idx_t, std::vector<double>(K, lam), -cfg.max_tx_power(nn));
    for (int k = 0; k < K; ++k) {
      std::vector<int> cone;
      for (int l = 0; l < L; ++l) {
        cone.push_back(layout[k][nn * L + l]);
        cone.push_back(layout[k][D + nn * L + l]);
      }
      prog.add_cone(std::move(cone), i_t + j * K + k, k);
    }
  }
  {
    std::vector<int> idx;
    std::vector<double> up, dn;
    for (int k = 0; k < K; ++k) {
      idx.push_back(i_mu + k);
      up.push_back(kc);
      dn.push_back(-kc);
    }
    idx.push_back(i_se);
    up.push_back(-1.0);
    dn.push_back(-1.0);
    prog.add_linear(idx, up, cloud_const - cfg.harvested_cloud);
    prog.add_linear(idx, dn, cfg.harvested_cloud - cloud_const);
  }
  add_rate_and_delay(prog, cfg, coeffs, i_mu, i_r);

  // Starting point: the warm start restricted to the active RRHs, with
  // epigraph variables lifted above their bounds.
  VectorXd x0 = VectorXd::Zero(n);
  if (warm) {
    write_beams(x0, layout, warm->w);
    for (int k = 0; k < K; ++k) {
      x0(i_mu + k) = warm->mu_cubed(k) / kRate3;
      x0(i_r + k) = warm->r(k) / kRateUnit;
      pull_inside(x0(i_r + k), x0(i_mu + k), cfg.arrival_rates(k) / kRateUnit, cfg.delay_qos(k) * kRateUnit);
    }
  }
  for (int j = 0; j < M; ++j) {
    double pn = 0.0;
    for (int k = 0; k < K; ++k) {
      const double pw = warm ? beam_block(warm->w, on[j], k, L).squaredNorm() : 0.0;
      x0(i_t + j * K + k) = pw * (1.0 + 1e-6) + 1e-12;
      pn += cfg.amp_inefficiency(on[j]) * x0(i_t + j * K + k);
    }
    const double dev = std::abs(pn - cfg.harvested_rrh(on[j]));
    x0(i_sn + j) = dev + 0.1 * (1.0 + dev);
  }
  {
    double pe = cloud_const;
    for (int k = 0; k < K; ++k) pe += kc * x0(i_mu + k);
    const double dev = std::abs(pe - cfg.harvested_cloud);
    x0(i_se) = dev + 0.1 * (1.0 + dev);
  }

  BarrierOptions opts;
  opts.tol = tol;
  const BarrierResult res = prog.solve(x0, opts);
  if (res.status == BarrierStatus::Infeasible) return std::nullopt;

  TopologySolution sol;
  sol.newton_steps = res.newton_steps;
  YBlock& y = sol.state.y;
  ZBlock& z = sol.state.z;
  y.mu_cubed = res.x.segment(i_mu, K) * kRate3;
  y.r = res.x.segment(i_r, K) * kRateUnit;
  y.w = read_beams(res.x, layout, D);
  y.t = VectorXd::Zero(N * K);
  y.p = VectorXd::Zero(N);
  z.b = b;
  z.a = VectorXi::Zero(N * K);
  for (int j = 0; j < M; ++j) {
    const int nn = on[j];
    for (int k = 0; k < K; ++k) {
      y.t(nn * K + k) = res.x(i_t + j * K + k);
      z.a(nn * K + k) = 1;
    }
    y.p(nn) = cfg.amp_inefficiency(nn) * y.t.segment(nn * K, K).sum();
  }
  z.x = y.t;
  y.p_cloud = cfg.compute_coeff * y.mu_cubed.sum() + cloud_const;

  double cost = trade_cost_convex(y.p_cloud, cfg.harvested_cloud, prices);
  for (int nn = 0; nn < N; ++nn) cost += trade_cost_convex(y.p(nn), cfg.harvested_rrh(nn), prices);
  sol.cost = cost;
  return sol;
}

}  // namespace gcran
