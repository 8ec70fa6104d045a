#ifndef GCRAN_REPORT_IO_HPP
#define GCRAN_REPORT_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gcran/runner.hpp"

namespace gcran {

std::string status_name(RunStatus s);

/// Process exit code: 0 converged, 2 infeasible, 3 not converged.
int exit_code(RunStatus s);

/// Structured text (JSON) form of a run report. Wall-clock timings are left
/// out so that repeated runs give identical documents.
std::string report_to_json(const RunReport& rep);

/// Columns: lambda_mbps,cost,feasible,outer_iters,admm_iters_total.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Every outer iteration's ADMM trace, tagged by the outer iteration.
void write_traces_csv(std::ostream& os, const RunReport& rep);

}  // namespace gcran

#endif  // GCRAN_REPORT_IO_HPP
