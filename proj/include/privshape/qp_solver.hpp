#pragma once

// Numerical solver for the sparse convex quadratic programs assembled in
// qp.hpp.  Operator-splitting first-order iterations find a near-optimal
// point; an active-set polish step then solves the reduced KKT system so
// the returned solution satisfies stationarity and feasibility to tight
// tolerances.  Fully deterministic: identical inputs give identical
// outputs, bit for bit.

#include <cstdint>
#include <string>
#include <vector>

#include "privshape/qp.hpp"

namespace privshape {

enum class SolveStatus {
  optimal,
  infeasible,
  iteration_limit,
};

std::string to_string(SolveStatus s);

struct SolverOptions {
  int max_iter = 200000;
  double eps_abs = 1e-9;          // termination tolerance on primal/dual residuals
  double eps_rel = 1e-9;
  double eps_infeasible = 1e-7;   // certificate detection tolerance
  double sigma = 1e-6;            // proximal regularisation
  double alpha = 1.6;             // relaxation parameter
  double rho0 = 0.1;              // initial penalty
  int check_interval = 25;        // residual / certificate check cadence
  bool polish = true;             // run active-set refinement after convergence
  int polish_refine_steps = 3;    // iterative refinement passes in the polish solve
  bool adaptive_rho = true;
  int scaling_iters = 10;         // Ruiz equilibration passes
};

// Worst-case violations of the optimality conditions at the returned point.
struct KktResiduals {
  double primal = 0;        // max constraint / bound violation
  double stationarity = 0;  // max |(Px + q + A'y)_i| over free coordinates, with
                            // sign-consistent multipliers at active bounds
  double complementarity = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::iteration_limit;
  std::vector<double> x;     // primal solution (num_vars)
  std::vector<double> y;     // multipliers for the general rows (num_rows)
  std::vector<double> z_bound;  // multipliers for the variable bounds (num_vars)
  double objective = 0;      // ½x'Px + q'x + constant
  int iterations = 0;
  bool polished = false;
  KktResiduals kkt;
};

// Solves  minimise ½x'Px + q'x + c  subject to  l ≤ Ax ≤ u  and
// lb ≤ x ≤ ub, with P positive semidefinite.  Binary markers on the
// program are ignored here (the relaxation is solved); see miqp.hpp for
// integral solves.
SolveResult solve_qp(const QuadraticProgram& qp, const SolverOptions& opts = {},
                     const std::vector<double>* warm_x = nullptr,
                     const std::vector<double>* warm_y = nullptr);

// Evaluates ½x'Px + q'x + c at the given point.
double qp_objective(const QuadraticProgram& qp, const std::vector<double>& x);

// Recomputes the optimality residuals of (x, y) against the program from
// scratch; used by callers that need an audit independent of the solver's
// own bookkeeping.
KktResiduals check_kkt(const QuadraticProgram& qp, const std::vector<double>& x,
                       const std::vector<double>& y);

}  // namespace privshape
