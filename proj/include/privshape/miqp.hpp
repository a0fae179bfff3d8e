#pragma once

// Branch-and-bound wrapper around solve_qp for programs whose binary
// variables gate charge/discharge exclusivity.  Relaxations are solved
// continuously; a node is integral when every step's charge/discharge
// pair is complementary, so most instances finish at the root.

#include <vector>

#include "privshape/qp.hpp"
#include "privshape/qp_solver.hpp"

namespace privshape {

struct MiqpOptions {
  SolverOptions qp;
  int node_limit = 10000;
  double rel_gap = 1e-6;       // terminate when (upper-lower) ≤ rel_gap·max(1,|upper|)
  double comp_tol = 1e-6;      // |p_c·p_d| threshold for accepting a relaxation
  double bin_tol = 1e-6;       // integrality threshold on the binaries themselves
};

// One charge/discharge pair gated by a binary: binary at 1 permits
// charging and forbids discharging, 0 the reverse.
struct GatedPair {
  int binary;
  int p_charge;
  int p_discharge;
  double charge_cap;
  double discharge_cap;
};

struct MiqpResult {
  SolveStatus status = SolveStatus::iteration_limit;
  std::vector<double> x;
  std::vector<double> y;
  double objective = 0;
  double best_bound = 0;   // global lower bound at termination
  int nodes_explored = 0;
  bool incumbent_found = false;
  KktResiduals kkt;        // residuals of the returned point's relaxation
};

// Solves the program to global optimality over the binaries.  `pairs`
// identifies which binaries gate which power pairs; binaries not listed
// are branched on plain 0/1 integrality.
MiqpResult solve_miqp(const QuadraticProgram& qp, const std::vector<GatedPair>& pairs,
                      const MiqpOptions& opts = {});

}  // namespace privshape
