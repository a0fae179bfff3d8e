#pragma once
// Sparse quadratic-program container shared by the objective builders, the
// device constraint emitters and the solver.
//
// Canonical form:
//   minimize    1/2 x'Px + q'x + r
//   subject to  row_lo <= A x <= row_hi   (equality rows have row_lo == row_hi)
//               var_lo <= x <= var_hi
// with an optional list of variables that are binary in the integer problem
// (they stay relaxed to their [0,1] bounds inside the QP relaxation).

#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace privshape {

// Marker for a missing row/variable bound.
inline constexpr double kQpInf = std::numeric_limits<double>::infinity();

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// A contiguous block of variable indices: base, base+1, ..., base+count-1.
struct VarSpan {
  int base = 0;
  int count = 0;
  int operator[](int i) const { return base + i; }
};

struct QuadraticProgram {
  int num_vars = 0;
  int num_rows = 0;
  std::vector<Triplet> quad;  // symmetric P given as upper-triangle entries (col >= row)
  std::vector<double> linear;
  double constant = 0.0;
  std::vector<Triplet> rows;
  std::vector<double> row_lo, row_hi;
  std::vector<double> var_lo, var_hi;
  std::vector<int> binaries;

  int add_var(double lo, double hi);
  VarSpan add_vars(int count, double lo, double hi);

  // Starts a new constraint row and returns its index.
  int add_row(double lo, double hi);
  int add_row(double lo, double hi, std::initializer_list<std::pair<int, double>> terms);
  void row_term(int row, int var, double coef);

  // Accumulates into P (upper triangle; (i,j) and (j,i) are the same entry)
  // and the linear/constant parts of the objective.
  void add_quad(int i, int j, double value);
  void add_linear(int i, double value);

  void set_bounds(int var, double lo, double hi);

  // Structural checks: indices in range, bounds ordered, binaries in [0,1].
  void validate() const;

  // Plain-text sparse dump: one section per component, `row col value`
  // triplets with full double precision. Intended for debugging/diffing.
  void dump_triplets(std::ostream& out) const;
};

}  // namespace privshape
