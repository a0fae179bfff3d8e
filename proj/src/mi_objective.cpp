#include "privshape/mi_objective.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace privshape {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("mi_objective: " + msg);
}

double log2_ratio(double num, double den) { return std::log2(num / den); }

}  // namespace

HistogramConstants update_constants(const std::vector<double>& history_x,
                                    const std::vector<double>& history_y,
                                    const BinningScheme& binning, double eps,
                                    int required_window) {
  if (history_x.size() != history_y.size())
    fail("history sequences have different lengths");
  if (history_x.empty()) fail("history is empty");
  if (required_window >= 0 && static_cast<int>(history_x.size()) != required_window)
    fail("history window holds " + std::to_string(history_x.size()) + " samples but " +
         std::to_string(required_window) + " are required (cold start: seed the window first)");
  if (eps < 0) fail("smoothing must be nonnegative");

  HistogramConstants hc;
  hc.m = binning.x.count;
  hc.n = binning.y.count;
  hc.eps = eps;
  hc.window = static_cast<int>(history_x.size());
  const int cells = hc.m * hc.n;
  hc.n_eps = static_cast<double>(hc.window) + eps * cells;
  if (!(hc.n_eps > 0)) fail("effective observation count must be positive");

  std::vector<double> counts(cells, 0.0);
  for (std::size_t t = 0; t < history_x.size(); ++t) {
    const int i = binning.x.index(history_x[t]) - 1;
    const int j = binning.y.index(history_y[t]) - 1;
    counts[static_cast<std::size_t>(i) * hc.n + j] += 1.0;
  }
  hc.a.assign(cells, 0.0);
  for (int k = 0; k < cells; ++k) hc.a[k] = (counts[k] + eps) / hc.n_eps;
  hc.b.assign(hc.n, 0.0);
  hc.c.assign(hc.m, 0.0);
  for (int i = 0; i < hc.m; ++i)
    for (int j = 0; j < hc.n; ++j) {
      const double v = hc.a_at(i, j);
      hc.b[j] += v;
      hc.c[i] += v;
    }
  for (int j = 0; j < hc.n; ++j)
    if (!(hc.b[j] > 0)) fail("zero mass in a y bin; use positive smoothing");
  for (int i = 0; i < hc.m; ++i)
    if (!(hc.c[i] > 0)) fail("zero mass in an x bin; use positive smoothing");
  return hc;
}

MiApproxProgram build_mi_program(const std::vector<double>& x_forecast,
                                 const HistogramConstants& constants,
                                 const BinningScheme& binning, double delta) {
  if (x_forecast.empty()) fail("empty forecast");
  if (constants.m != binning.x.count || constants.n != binning.y.count)
    fail("constants and binning disagree on bin counts");
  for (int k = 0; k < constants.m * constants.n; ++k)
    if (!(constants.a[k] > 0)) fail("joint constants must be strictly positive");

  MiApproxProgram prog;
  prog.horizon = static_cast<int>(x_forecast.size());
  prog.n_bins = constants.n;
  prog.delta = delta;
  prog.constants = constants;
  prog.i_star.reserve(x_forecast.size());
  for (double x : x_forecast) prog.i_star.push_back(binning.x.index(x) - 1);
  prog.y_edges.resize(constants.n + 1);
  for (int j = 0; j <= constants.n; ++j) prog.y_edges[j] = binning.y.edge(j);

  const int T = prog.horizon;
  const int n = prog.n_bins;
  const double N = constants.n_eps;
  const double nu = HistogramConstants::kNu;

  // Value at z = 0: the plug-in MI of the window histogram itself.
  prog.constant = 0;
  for (int i = 0; i < constants.m; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = constants.a_at(i, j);
      prog.constant += a * log2_ratio(a, constants.b[j] * constants.c[i]);
    }

  // Linear coefficients.  Raising z[τ][j] adds mass 1/N to cell
  // (i*_τ, j), contributing the cell's log-ratio plus the derivative
  // correction, and also grows the y-marginal's correction for every
  // cell in column j.
  prog.linear.assign(static_cast<std::size_t>(T) * n, 0.0);
  for (int t = 0; t < T; ++t) {
    const int i = prog.i_star[t];
    for (int j = 0; j < n; ++j) {
      const double a = constants.a_at(i, j);
      const double k_ij = log2_ratio(a, constants.b[j] * constants.c[i]);
      double col_mass = 0;
      for (int h = 0; h < constants.m; ++h) col_mass += constants.a_at(h, j);
      prog.linear[static_cast<std::size_t>(t) * n + j] =
          (nu + k_ij) / N - nu * col_mass / (constants.b[j] * N);
    }
  }

  // Quadratic part.  With Z_ij the z mass landing in cell (i, j) and
  // W_j the total column-j mass, the second-order terms are
  // (ν/N²)·(Σ_ij Z_ij²/a_ij − Σ_j W_j²/b_j), which couples only steps
  // sharing a y bin: per bin j the Hessian over steps is
  // (2ν/N²)·([i*_τ = i*_σ]/a_{i*_τ j} − 1/b_j).
  prog.quad_blocks.assign(n, std::vector<double>(static_cast<std::size_t>(T) * T, 0.0));
  prog.projection_magnitude = 0;
  Eigen::MatrixXd block(T, T);
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < T; ++s) {
        double v = -1.0 / constants.b[j];
        if (prog.i_star[t] == prog.i_star[s]) v += 1.0 / constants.a_at(prog.i_star[t], j);
        block(t, s) = (2.0 * nu / (N * N)) * v;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    if (es.info() != Eigen::Success) fail("eigendecomposition failed");
    Eigen::VectorXd lam = es.eigenvalues();
    double clipped = 0;
    for (int k = 0; k < T; ++k)
      if (lam[k] < 0) {
        clipped += -lam[k];
        lam[k] = 0;
      }
    prog.projection_magnitude += clipped;
    Eigen::MatrixXd psd =
        es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    std::vector<double>& out = prog.quad_blocks[j];
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < T; ++s) {
        // Store the exact symmetrisation so downstream assembly sees a
        // symmetric matrix bit for bit.
        out[static_cast<std::size_t>(t) * T + s] = 0.5 * (psd(t, s) + psd(s, t));
      }
  }
  return prog;
}

namespace {

void check_assignment(const MiApproxProgram& prog, const std::vector<double>& z) {
  const std::size_t want = static_cast<std::size_t>(prog.horizon) * prog.n_bins;
  if (z.size() != want) fail("assignment has wrong size");
  for (int t = 0; t < prog.horizon; ++t) {
    double sum = 0;
    for (int j = 0; j < prog.n_bins; ++j) {
      const double v = z[static_cast<std::size_t>(t) * prog.n_bins + j];
      if (v < -1e-8 || v > 1.0 + 1e-8) fail("assignment entry outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-8) fail("step mass does not sum to 1");
  }
}

}  // namespace

double evaluate_mi_approx(const MiApproxProgram& prog, const std::vector<double>& z) {
  check_assignment(prog, z);
  const HistogramConstants& hc = prog.constants;
  const double N = hc.n_eps;
  const double nu = HistogramConstants::kNu;
  const int n = prog.n_bins;

  // Mass added per cell and per column.
  std::vector<double> zcell(static_cast<std::size_t>(hc.m) * n, 0.0);
  std::vector<double> wcol(n, 0.0);
  for (int t = 0; t < prog.horizon; ++t) {
    const int i = prog.i_star[t];
    for (int j = 0; j < n; ++j) {
      const double v = z[static_cast<std::size_t>(t) * n + j];
      zcell[static_cast<std::size_t>(i) * n + j] += v;
      wcol[j] += v;
    }
  }
  double total = 0;
  for (int i = 0; i < hc.m; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = hc.a_at(i, j);
      const double zc = zcell[static_cast<std::size_t>(i) * n + j];
      const double first = a + zc / N;
      const double brace = log2_ratio(a, hc.b[j] * hc.c[i]) + nu * zc / (a * N) -
                           nu * wcol[j] / (hc.b[j] * N);
      total += first * brace;
    }
  return total;
}

double evaluate_via_coefficients(const MiApproxProgram& prog, const std::vector<double>& z) {
  check_assignment(prog, z);
  const int T = prog.horizon;
  const int n = prog.n_bins;
  double total = prog.constant;
  for (std::size_t k = 0; k < z.size(); ++k) total += prog.linear[k] * z[k];
  for (int j = 0; j < n; ++j) {
    const std::vector<double>& q = prog.quad_blocks[j];
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < T; ++s)
        total += 0.5 * q[static_cast<std::size_t>(t) * T + s] *
                 z[static_cast<std::size_t>(t) * n + j] * z[static_cast<std::size_t>(s) * n + j];
  }
  return total;
}

MiProgramVars add_mi_program(QuadraticProgram& qp, const MiApproxProgram& prog,
                             const VarSpan& y_vars, double weight) {
  if (y_vars.count != prog.horizon) fail("y variable span does not match the horizon");
  MiProgramVars vars;
  const int T = prog.horizon;
  const int n = prog.n_bins;
  vars.z = qp.add_vars(T * n, 0.0, 1.0);

  for (int t = 0; t < T; ++t) {
    // Unit mass per step.
    const int row = qp.add_row(1.0, 1.0);
    for (int j = 0; j < n; ++j) qp.row_term(row, vars.z[t * n + j], 1.0);
    // Lower edge link: Σ_j z·edge[j] ≤ y.
    const int lo_row = qp.add_row(-kQpInf, 0.0);
    for (int j = 0; j < n; ++j) qp.row_term(lo_row, vars.z[t * n + j], prog.y_edges[j]);
    qp.row_term(lo_row, y_vars[t], -1.0);
    // Upper edge link, open side closed by delta: y ≤ Σ_j z·edge[j+1] − δ.
    const int hi_row = qp.add_row(-kQpInf, -prog.delta);
    qp.row_term(hi_row, y_vars[t], 1.0);
    for (int j = 0; j < n; ++j) qp.row_term(hi_row, vars.z[t * n + j], -prog.y_edges[j + 1]);
  }

  qp.constant += weight * prog.constant;
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < n; ++j)
      qp.add_linear(vars.z[t * n + j], weight * prog.linear[static_cast<std::size_t>(t) * n + j]);
  for (int j = 0; j < n; ++j) {
    const std::vector<double>& q = prog.quad_blocks[j];
    for (int t = 0; t < T; ++t)
      for (int s = t; s < T; ++s) {
        const double v = q[static_cast<std::size_t>(t) * T + s];
        if (v != 0.0) qp.add_quad(vars.z[t * n + j], vars.z[s * n + j], weight * v);
      }
  }
  return vars;
}

}  // namespace privshape
