#include "privshape/qp.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "privshape/csvio.hpp"

namespace privshape {

int QuadraticProgram::add_var(double lo, double hi) {
  var_lo.push_back(lo);
  var_hi.push_back(hi);
  linear.push_back(0.0);
  return num_vars++;
}

VarSpan QuadraticProgram::add_vars(int count, double lo, double hi) {
  VarSpan span{num_vars, count};
  for (int i = 0; i < count; ++i) add_var(lo, hi);
  return span;
}

int QuadraticProgram::add_row(double lo, double hi) {
  row_lo.push_back(lo);
  row_hi.push_back(hi);
  return num_rows++;
}

int QuadraticProgram::add_row(double lo, double hi, std::initializer_list<std::pair<int, double>> terms) {
  const int r = add_row(lo, hi);
  for (const auto& [var, coef] : terms) row_term(r, var, coef);
  return r;
}

void QuadraticProgram::row_term(int row, int var, double coef) {
  if (coef != 0.0) rows.push_back({row, var, coef});
}

void QuadraticProgram::add_quad(int i, int j, double value) {
  if (value == 0.0) return;
  if (i > j) std::swap(i, j);
  quad.push_back({i, j, value});
}

void QuadraticProgram::add_linear(int i, double value) { linear[static_cast<std::size_t>(i)] += value; }

void QuadraticProgram::set_bounds(int var, double lo, double hi) {
  var_lo[static_cast<std::size_t>(var)] = lo;
  var_hi[static_cast<std::size_t>(var)] = hi;
}

void QuadraticProgram::validate() const {
  auto in_vars = [this](int v) { return v >= 0 && v < num_vars; };
  if (static_cast<int>(linear.size()) != num_vars || static_cast<int>(var_lo.size()) != num_vars ||
      static_cast<int>(var_hi.size()) != num_vars)
    throw std::runtime_error("qp: variable arrays out of sync");
  if (static_cast<int>(row_lo.size()) != num_rows || static_cast<int>(row_hi.size()) != num_rows)
    throw std::runtime_error("qp: row arrays out of sync");
  for (int v = 0; v < num_vars; ++v)
    if (!(var_lo[v] <= var_hi[v])) throw std::runtime_error("qp: inverted bounds on variable " + std::to_string(v));
  for (int r = 0; r < num_rows; ++r)
    if (!(row_lo[r] <= row_hi[r])) throw std::runtime_error("qp: inverted bounds on row " + std::to_string(r));
  for (const auto& t : rows)
    if (t.row < 0 || t.row >= num_rows || !in_vars(t.col) || !std::isfinite(t.value))
      throw std::runtime_error("qp: bad constraint triplet");
  for (const auto& t : quad)
    if (!in_vars(t.row) || !in_vars(t.col) || t.row > t.col || !std::isfinite(t.value))
      throw std::runtime_error("qp: bad quadratic triplet");
  for (int b : binaries) {
    if (!in_vars(b)) throw std::runtime_error("qp: binary index out of range");
    if (var_lo[b] < 0.0 || var_hi[b] > 1.0)
      throw std::runtime_error("qp: binary variable " + std::to_string(b) + " must have bounds within [0,1]");
  }
}

void QuadraticProgram::dump_triplets(std::ostream& out) const {
  out << "# quadratic program: " << num_vars << " variables, " << num_rows << " rows\n";
  out << "quad " << quad.size() << "\n";
  for (const auto& t : quad) out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
  out << "linear " << linear.size() << "\n";
  for (std::size_t i = 0; i < linear.size(); ++i)
    if (linear[i] != 0.0) out << i << ' ' << format_double(linear[i]) << '\n';
  out << "constant " << format_double(constant) << "\n";
  out << "rows " << rows.size() << "\n";
  for (const auto& t : rows) out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
  out << "row_bounds " << num_rows << "\n";
  for (int r = 0; r < num_rows; ++r)
    out << r << ' ' << format_double(row_lo[r]) << ' ' << format_double(row_hi[r]) << '\n';
  out << "var_bounds " << num_vars << "\n";
  for (int v = 0; v < num_vars; ++v)
    out << v << ' ' << format_double(var_lo[v]) << ' ' << format_double(var_hi[v]) << '\n';
  out << "binaries " << binaries.size() << "\n";
  for (int b : binaries) out << b << '\n';
}

}  // namespace privshape
