#include "gcran/report_io.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"

namespace gcran {

namespace {

using nlohmann::json;

json to_json(const VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const VectorXi& v) { return json(std::vector<int>(v.data(), v.data() + v.size())); }

}  // namespace

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::NotConverged:
      return "not_converged";
    case RunStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return 0;
    case RunStatus::Infeasible:
      return 2;
    case RunStatus::NotConverged:
      return 3;
  }
  return 3;
}

std::string report_to_json(const RunReport& rep) {
  json j;
  j["config_hash"] = rep.config_hash;
  j["seed"] = rep.seed;
  j["status"] = status_name(rep.status);
  j["message"] = rep.message;
  j["infeasible_users"] = rep.infeasible_users;
  j["objectives"] = rep.objectives;
  j["outer_iterations"] = rep.outer_iterations;
  j["admm_iterations_total"] = rep.admm_iterations_total;

  json outer = json::array();
  for (const auto& r : rep.outer) {
    outer.push_back({{"iteration", r.iteration},
                     {"objective", r.objective},
                     {"admm_objective", r.admm_objective},
                     {"admm_iterations", r.admm_iterations},
                     {"admm_converged", r.admm_converged},
                     {"active_rrhs", r.active_rrhs}});
  }
  j["outer"] = outer;

  json fin;
  fin["cost"] = rep.cost;
  fin["rrh_active"] = to_json(rep.b);
  const Index N = rep.b.size();
  json assoc = json::array();
  if (N > 0) {
    const Index K = rep.a.size() / N;
    for (Index n = 0; n < N; ++n) assoc.push_back(to_json(VectorXi(rep.a.segment(n * K, K))));
  }
  fin["association"] = assoc;
  fin["rrh_power_w"] = to_json(rep.p);
  fin["cloud_power_w"] = rep.p_cloud;
  fin["rates_bps"] = to_json(rep.rates);
  fin["compute_bps"] = to_json(rep.compute);
  fin["delays_s"] = to_json(rep.delays);
  json beams = json::array();
  for (Index k = 0; k < rep.w.cols(); ++k) {
    json col = json::array();
    for (Index i = 0; i < rep.w.rows(); ++i) col.push_back({rep.w(i, k).real(), rep.w(i, k).imag()});
    beams.push_back(col);
  }
  fin["beamformers"] = beams;
  j["final"] = fin;

  json traces = json::array();
  for (std::size_t i = 0; i < rep.traces.size(); ++i) {
    const auto& tr = rep.traces[i];
    json rows = json::array();
    for (const auto& r : tr.rows) rows.push_back({r.iteration, r.objective, r.primal_norm, r.dual_norm, r.rho});
    traces.push_back({{"outer", i + 1},
                      {"converged", tr.converged},
                      {"approximate_topology", tr.approximate_topology},
                      {"columns", {"iteration", "objective", "primal_residual", "dual_residual", "rho"}},
                      {"rows", rows}});
  }
  j["admm_traces"] = traces;
  return j.dump(2) + "\n";
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto old = os.precision(12);
  os << "lambda_mbps,cost,feasible,outer_iters,admm_iters_total\n";
  for (const auto& r : rows) {
    os << r.lambda_mbps << ',';
    if (std::isfinite(r.cost)) {
      os << r.cost;
    } else {
      os << "nan";
    }
    os << ',' << (r.feasible ? 1 : 0) << ',' << r.outer_iters << ',' << r.admm_iters_total << '\n';
  }
  os.precision(old);
}

void write_traces_csv(std::ostream& os, const RunReport& rep) {
  for (std::size_t i = 0; i < rep.traces.size(); ++i) {
    rep.traces[i].write_csv(os, std::to_string(i + 1), i == 0);
  }
  if (rep.traces.empty()) os << "outer,iteration,objective,primal_residual,dual_residual,rho\n";
}

}  // namespace gcran
