#pragma once

// Convex surrogate for the mutual information between the household's
// sensitive load and the grid-visible load over a planning horizon.
//
// The surrogate tracks a smoothed joint histogram of (x, y) bin pairs
// over a trailing window.  Each horizon step contributes one unit of
// relaxed bin-membership mass z[τ][j] ∈ [0,1] for the y bin, at the
// known x bin of that step; the objective is the product-form expansion
// of the plug-in MI of the augmented histogram, which is quadratic in z.
// With the marginal constants derived from the joint, the quadratic part
// decomposes into one positive-semidefinite block per y bin.

#include <vector>

#include "privshape/core.hpp"
#include "privshape/qp.hpp"

namespace privshape {

// Smoothed relative frequencies of the trailing (x, y) window.
struct HistogramConstants {
  int m = 0;  // x bins
  int n = 0;  // y bins
  std::vector<double> a;  // joint, m×n row-major, sums to 1
  std::vector<double> b;  // y marginal, length n
  std::vector<double> c;  // x marginal, length m
  double n_eps = 0;       // window + ε·m·n, the effective observation count
  double eps = 0;
  int window = 0;

  static constexpr double kNu = 1.4426950408889634074;  // 1/ln 2

  double a_at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

// Builds the constants from aligned histories.  If required_window ≥ 0
// the history length must match it exactly; a shorter history is a
// cold-start error (the caller must seed the window first).
HistogramConstants update_constants(const std::vector<double>& history_x,
                                    const std::vector<double>& history_y,
                                    const BinningScheme& binning, double eps,
                                    int required_window = -1);

// The assembled surrogate for one horizon: constants, per-step x bins,
// objective coefficients over the flattened z variables (index τ·n + j),
// and the y-bin edges used by the linking constraints.
struct MiApproxProgram {
  int horizon = 0;  // steps (W+1)
  int n_bins = 0;   // y bins
  std::vector<int> i_star;            // x bin per step, 0-based
  double constant = 0;                // value at z = 0
  std::vector<double> linear;         // per z variable, horizon×n
  std::vector<std::vector<double>> quad_blocks;  // per y bin: Hessian over steps,
                                                 // horizon×horizon row-major, PSD
  double projection_magnitude = 0;    // eigenvalue mass clipped to reach PSD
  std::vector<double> y_edges;        // n+1 edges mapping bins to y values
  double delta = 1e-6;                // gap closing the open side of the y link
  HistogramConstants constants;       // kept for direct evaluation
};

MiApproxProgram build_mi_program(const std::vector<double>& x_forecast,
                                 const HistogramConstants& constants,
                                 const BinningScheme& binning, double delta = 1e-6);

// Direct evaluation of the surrogate at a z assignment (horizon×n,
// flattened τ·n + j), summing the product form term by term without the
// extracted coefficients.  z must lie in [0,1] with each step's mass
// summing to 1, within 1e-8.
double evaluate_mi_approx(const MiApproxProgram& program, const std::vector<double>& z);

// Same value computed from the extracted constant/linear/quadratic
// coefficients; agrees with the direct evaluation to tight tolerance.
double evaluate_via_coefficients(const MiApproxProgram& program, const std::vector<double>& z);

// z variables added to a larger program, plus their structural rows.
struct MiProgramVars {
  VarSpan z;  // horizon·n variables, index τ·n + j
};

// Appends the surrogate to qp scaled by weight: z variables with box
// bounds, one unit-mass equality per step, the two-sided link rows tying
// each y variable to its bin edges, and the objective terms.
MiProgramVars add_mi_program(QuadraticProgram& qp, const MiApproxProgram& program,
                             const VarSpan& y_vars, double weight);

}  // namespace privshape
