#include "privshape/qp_solver.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace privshape {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Tri {
  int r, c;
  double v;
};

// The solver works on the expanded form  l ≤ [A; I] x ≤ u  so variable
// bounds and general rows share one projection step.
struct Expanded {
  int n = 0;        // variables
  int m_rows = 0;   // general rows
  int m = 0;        // general rows + n bound rows
  std::vector<Tri> p_tris;  // full symmetric P
  std::vector<Tri> a_tris;  // stacked constraint matrix
  Vec q;
  Vec lo, up;
};

Expanded expand(const QuadraticProgram& qp) {
  Expanded ex;
  ex.n = qp.num_vars;
  ex.m_rows = qp.num_rows;
  ex.m = qp.num_rows + qp.num_vars;
  ex.p_tris.reserve(qp.quad.size() * 2);
  for (const Triplet& t : qp.quad) {
    ex.p_tris.push_back({t.row, t.col, t.value});
    if (t.row != t.col) ex.p_tris.push_back({t.col, t.row, t.value});
  }
  ex.a_tris.reserve(qp.rows.size() + qp.num_vars);
  for (const Triplet& t : qp.rows) ex.a_tris.push_back({t.row, t.col, t.value});
  for (int j = 0; j < qp.num_vars; ++j) ex.a_tris.push_back({qp.num_rows + j, j, 1.0});
  ex.q = Vec::Zero(ex.n);
  for (int j = 0; j < ex.n; ++j) ex.q[j] = qp.linear[j];
  ex.lo = Vec(ex.m);
  ex.up = Vec(ex.m);
  for (int i = 0; i < qp.num_rows; ++i) {
    ex.lo[i] = qp.row_lo[i];
    ex.up[i] = qp.row_hi[i];
  }
  for (int j = 0; j < qp.num_vars; ++j) {
    ex.lo[qp.num_rows + j] = qp.var_lo[j];
    ex.up[qp.num_rows + j] = qp.var_hi[j];
  }
  return ex;
}

struct Scaling {
  Vec d;      // variable scale
  Vec e;      // row scale
  double c = 1.0;  // cost scale
};

// Iterative symmetric equilibration of [[P, A'], [A, 0]] plus cost
// normalisation, computed against the original triplets so each pass is
// O(nnz) without rebuilding matrices.
Scaling ruiz_scaling(const Expanded& ex, int passes) {
  Scaling s;
  s.d = Vec::Ones(ex.n);
  s.e = Vec::Ones(ex.m);
  s.c = 1.0;
  for (int pass = 0; pass < passes; ++pass) {
    Vec cn = Vec::Zero(ex.n);
    Vec rn = Vec::Zero(ex.m);
    for (const Tri& t : ex.p_tris) {
      const double v = std::abs(s.c * s.d[t.r] * t.v * s.d[t.c]);
      cn[t.c] = std::max(cn[t.c], v);
    }
    for (const Tri& t : ex.a_tris) {
      const double v = std::abs(s.e[t.r] * t.v * s.d[t.c]);
      cn[t.c] = std::max(cn[t.c], v);
      rn[t.r] = std::max(rn[t.r], v);
    }
    for (int j = 0; j < ex.n; ++j) s.d[j] *= (cn[j] > 0) ? 1.0 / std::sqrt(cn[j]) : 1.0;
    for (int i = 0; i < ex.m; ++i) s.e[i] *= (rn[i] > 0) ? 1.0 / std::sqrt(rn[i]) : 1.0;

    Vec pc = Vec::Zero(ex.n);
    for (const Tri& t : ex.p_tris)
      pc[t.c] = std::max(pc[t.c], std::abs(s.c * s.d[t.r] * t.v * s.d[t.c]));
    double mean_pc = ex.n ? pc.sum() / ex.n : 0.0;
    double qn = 0.0;
    for (int j = 0; j < ex.n; ++j) qn = std::max(qn, std::abs(s.c * s.d[j] * ex.q[j]));
    const double denom = std::max(mean_pc, qn);
    if (denom > 0) s.c *= 1.0 / denom;
  }
  return s;
}

SpMat build_sparse(int rows, int cols, const std::vector<Tri>& tris,
                   const Vec* row_scale, const Vec* col_scale, double factor) {
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(tris.size());
  for (const Tri& t : tris) {
    double v = t.v * factor;
    if (row_scale) v *= (*row_scale)[t.r];
    if (col_scale) v *= (*col_scale)[t.c];
    ts.emplace_back(t.r, t.c, v);
  }
  SpMat m(rows, cols);
  m.setFromTriplets(ts.begin(), ts.end());
  return m;
}

SpMat build_kkt(const SpMat& p, const SpMat& a, double sigma, const Vec& rho) {
  const int n = static_cast<int>(p.rows());
  const int m = static_cast<int>(a.rows());
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(p.nonZeros() + 2 * a.nonZeros() + n + m);
  for (int k = 0; k < p.outerSize(); ++k)
    for (SpMat::InnerIterator it(p, k); it; ++it) ts.emplace_back(it.row(), it.col(), it.value());
  for (int j = 0; j < n; ++j) ts.emplace_back(j, j, sigma);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      ts.emplace_back(n + it.row(), it.col(), it.value());
      ts.emplace_back(it.col(), n + it.row(), it.value());
    }
  for (int i = 0; i < m; ++i) ts.emplace_back(n + i, n + i, -1.0 / rho[i]);
  SpMat kkt(n + m, n + m);
  kkt.setFromTriplets(ts.begin(), ts.end());
  return kkt;
}

double clip_pos(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

struct Audit {
  KktResiduals res;
  double worst = 0;
};

// Residuals computed from the original program data only.
Audit audit_point(const QuadraticProgram& qp, const std::vector<double>& x,
                  const std::vector<double>& y) {
  Audit a;
  const int n = qp.num_vars;
  Vec xv = Eigen::Map<const Vec>(x.data(), n);
  Vec g = Vec::Zero(n);
  for (const Triplet& t : qp.quad) {
    g[t.row] += t.value * xv[t.col];
    if (t.row != t.col) g[t.col] += t.value * xv[t.row];
  }
  for (int j = 0; j < n; ++j) g[j] += qp.linear[j];
  Vec ax = Vec::Zero(qp.num_rows);
  for (const Triplet& t : qp.rows) {
    ax[t.row] += t.value * xv[t.col];
    g[t.col] += t.value * y[t.row];
  }
  double prim = 0, comp = 0;
  for (int i = 0; i < qp.num_rows; ++i) {
    prim = std::max(prim, std::max(qp.row_lo[i] - ax[i], ax[i] - qp.row_hi[i]));
    const double up_slack = std::max(qp.row_hi[i] - ax[i], 0.0);
    const double lo_slack = std::max(ax[i] - qp.row_lo[i], 0.0);
    comp = std::max(comp, std::min(std::max(y[i], 0.0), up_slack));
    comp = std::max(comp, std::min(std::max(-y[i], 0.0), lo_slack));
  }
  double stat = 0;
  for (int j = 0; j < n; ++j) {
    prim = std::max(prim, std::max(qp.var_lo[j] - xv[j], xv[j] - qp.var_hi[j]));
    // Projected gradient: zero exactly when the gradient is admissible at
    // the point's position relative to its bounds.
    const double proj = clip_pos(xv[j] - g[j], qp.var_lo[j], qp.var_hi[j]);
    stat = std::max(stat, std::abs(xv[j] - proj));
  }
  a.res.primal = std::max(prim, 0.0);
  a.res.stationarity = stat;
  a.res.complementarity = comp;
  a.worst = std::max({a.res.primal, a.res.stationarity, a.res.complementarity});
  return a;
}

struct PolishOutcome {
  bool ok = false;
  std::vector<double> x;
  std::vector<double> y;       // general-row multipliers
  std::vector<double> z_bound; // bound multipliers
};

// Equality-constrained re-solve on the active set identified by the
// projection step, with iterative refinement against the unregularised
// KKT system.  Works in original (unscaled) units.
PolishOutcome polish_solution(const QuadraticProgram& qp, const Expanded& ex,
                              const Vec& z_scaled, const Vec& lo_scaled, const Vec& up_scaled,
                              const SolverOptions& opts) {
  PolishOutcome out;
  const int n = ex.n;
  struct Active {
    int row;      // index into expanded rows
    double value; // pinned value in original units
  };
  std::vector<Active> act;
  for (int i = 0; i < ex.m; ++i) {
    const bool eq = ex.lo[i] == ex.up[i];
    if (eq) {
      act.push_back({i, ex.lo[i]});
    } else if (z_scaled[i] <= lo_scaled[i] && std::isfinite(ex.lo[i])) {
      act.push_back({i, ex.lo[i]});
    } else if (z_scaled[i] >= up_scaled[i] && std::isfinite(ex.up[i])) {
      act.push_back({i, ex.up[i]});
    }
  }
  const int ma = static_cast<int>(act.size());
  const int dim = n + ma;
  const double delta = 1e-7;

  std::vector<int> row_slot(ex.m, -1);
  for (int k = 0; k < ma; ++k) row_slot[act[k].row] = k;

  std::vector<Eigen::Triplet<double>> ts;
  std::vector<Tri> aact;  // active rows, for refinement mat-vecs
  ts.reserve(ex.p_tris.size() + 2 * ex.a_tris.size() + dim);
  for (const Tri& t : ex.p_tris) ts.emplace_back(t.r, t.c, t.v);
  for (int j = 0; j < n; ++j) ts.emplace_back(j, j, delta);
  for (const Tri& t : ex.a_tris) {
    const int k = row_slot[t.r];
    if (k < 0) continue;
    ts.emplace_back(n + k, t.c, t.v);
    ts.emplace_back(t.c, n + k, t.v);
    aact.push_back({k, t.c, t.v});
  }
  for (int k = 0; k < ma; ++k) ts.emplace_back(n + k, n + k, -delta);
  SpMat kkt(dim, dim);
  kkt.setFromTriplets(ts.begin(), ts.end());

  Eigen::SimplicialLDLT<SpMat> ldlt;
  ldlt.compute(kkt);
  if (ldlt.info() != Eigen::Success) return out;

  Vec rhs(dim);
  for (int j = 0; j < n; ++j) rhs[j] = -ex.q[j];
  for (int k = 0; k < ma; ++k) rhs[n + k] = act[k].value;

  Vec xi = ldlt.solve(rhs);
  for (int it = 0; it < opts.polish_refine_steps; ++it) {
    // Residual against the unregularised system.
    Vec r = rhs;
    for (const Tri& t : ex.p_tris) r[t.r] -= t.v * xi[t.c];
    for (const Tri& t : aact) {
      r[n + t.r] -= t.v * xi[t.c];
      r[t.c] -= t.v * xi[n + t.r];
    }
    xi += ldlt.solve(r);
  }
  if (!xi.allFinite()) return out;

  out.ok = true;
  out.x.assign(xi.data(), xi.data() + n);
  out.y.assign(qp.num_rows, 0.0);
  out.z_bound.assign(n, 0.0);
  for (int k = 0; k < ma; ++k) {
    const int row = act[k].row;
    if (row < qp.num_rows)
      out.y[row] = xi[n + k];
    else
      out.z_bound[row - qp.num_rows] = xi[n + k];
  }
  return out;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

double qp_objective(const QuadraticProgram& qp, const std::vector<double>& x) {
  double quad = 0;
  for (const Triplet& t : qp.quad) {
    const double term = t.value * x[t.row] * x[t.col];
    quad += (t.row == t.col) ? 0.5 * term : term;
  }
  double lin = 0;
  for (int j = 0; j < qp.num_vars; ++j) lin += qp.linear[j] * x[j];
  return quad + lin + qp.constant;
}

KktResiduals check_kkt(const QuadraticProgram& qp, const std::vector<double>& x,
                       const std::vector<double>& y) {
  if (static_cast<int>(x.size()) != qp.num_vars || static_cast<int>(y.size()) != qp.num_rows)
    throw std::invalid_argument("check_kkt: point dimensions do not match the program");
  return audit_point(qp, x, y).res;
}

SolveResult solve_qp(const QuadraticProgram& qp, const SolverOptions& opts,
                     const std::vector<double>* warm_x, const std::vector<double>* warm_y) {
  qp.validate();
  SolveResult res;
  const int n = qp.num_vars;
  if (n == 0) {
    res.status = SolveStatus::optimal;
    res.objective = qp.constant;
    res.polished = false;
    return res;
  }

  Expanded ex = expand(qp);
  Scaling sc = ruiz_scaling(ex, opts.scaling_iters);

  SpMat P = build_sparse(n, n, ex.p_tris, &sc.d, &sc.d, sc.c);
  SpMat A = build_sparse(ex.m, n, ex.a_tris, &sc.e, &sc.d, 1.0);
  Vec q(n);
  for (int j = 0; j < n; ++j) q[j] = sc.c * sc.d[j] * ex.q[j];
  Vec lo(ex.m), up(ex.m);
  for (int i = 0; i < ex.m; ++i) {
    lo[i] = sc.e[i] * ex.lo[i];
    up[i] = sc.e[i] * ex.up[i];
  }

  Vec is_eq(ex.m);
  for (int i = 0; i < ex.m; ++i) is_eq[i] = (ex.lo[i] == ex.up[i]) ? 1.0 : 0.0;
  double rho_bar = opts.rho0;
  auto rho_vec = [&](double base) {
    Vec r(ex.m);
    for (int i = 0; i < ex.m; ++i)
      r[i] = clip_pos(is_eq[i] ? 1e3 * base : base, 1e-6, 1e6);
    return r;
  };
  Vec rho = rho_vec(rho_bar);

  Eigen::SimplicialLDLT<SpMat> ldlt;
  ldlt.compute(build_kkt(P, A, opts.sigma, rho));
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve_qp: KKT factorisation failed");

  Vec x = Vec::Zero(n), z = Vec::Zero(ex.m), y = Vec::Zero(ex.m);
  if (warm_x && static_cast<int>(warm_x->size()) == n) {
    for (int j = 0; j < n; ++j) x[j] = (*warm_x)[j] / sc.d[j];
    Vec ax = A * x;
    for (int i = 0; i < ex.m; ++i) z[i] = clip_pos(ax[i], lo[i], up[i]);
  }
  if (warm_y && static_cast<int>(warm_y->size()) == qp.num_rows) {
    for (int i = 0; i < qp.num_rows; ++i) y[i] = sc.c * (*warm_y)[i] / sc.e[i];
  }

  Vec y_prev_check = y;
  bool converged = false;
  bool infeasible = false;
  int iter = 0;
  Vec rhs(n + ex.m), sol(n + ex.m), xt(n), zt(ex.m), z_relaxed(ex.m);

  while (iter < opts.max_iter) {
    ++iter;
    for (int j = 0; j < n; ++j) rhs[j] = opts.sigma * x[j] - q[j];
    for (int i = 0; i < ex.m; ++i) rhs[n + i] = z[i] - y[i] / rho[i];
    sol = ldlt.solve(rhs);
    xt = sol.head(n);
    for (int i = 0; i < ex.m; ++i) zt[i] = z[i] + (sol[n + i] - y[i]) / rho[i];

    for (int j = 0; j < n; ++j) x[j] = opts.alpha * xt[j] + (1 - opts.alpha) * x[j];
    for (int i = 0; i < ex.m; ++i) {
      z_relaxed[i] = opts.alpha * zt[i] + (1 - opts.alpha) * z[i];
      const double v = z_relaxed[i] + y[i] / rho[i];
      z[i] = clip_pos(v, lo[i], up[i]);
      y[i] += rho[i] * (z_relaxed[i] - z[i]);
    }

    if (iter % opts.check_interval != 0) continue;

    // Residuals in original units.
    Vec ax = A * x;
    Vec px = P * x;
    Vec aty = A.transpose() * y;
    double rp = 0, np_ax = 0, np_z = 0;
    for (int i = 0; i < ex.m; ++i) {
      const double axi = ax[i] / sc.e[i];
      const double zi = z[i] / sc.e[i];
      rp = std::max(rp, std::abs(axi - zi));
      np_ax = std::max(np_ax, std::abs(axi));
      np_z = std::max(np_z, std::abs(zi));
    }
    double rd = 0, nd_px = 0, nd_q = 0, nd_aty = 0;
    for (int j = 0; j < n; ++j) {
      const double inv = 1.0 / (sc.c * sc.d[j]);
      const double g = (px[j] + q[j] + aty[j]) * inv;
      rd = std::max(rd, std::abs(g));
      nd_px = std::max(nd_px, std::abs(px[j] * inv));
      nd_q = std::max(nd_q, std::abs(q[j] * inv));
      nd_aty = std::max(nd_aty, std::abs(aty[j] * inv));
    }
    const double eps_p = opts.eps_abs + opts.eps_rel * std::max(np_ax, np_z);
    const double eps_d = opts.eps_abs + opts.eps_rel * std::max({nd_px, nd_q, nd_aty});
    if (rp <= eps_p && rd <= eps_d) {
      converged = true;
      break;
    }

    // Certificate of primal infeasibility from the drift of the
    // multipliers in original units.
    {
      Vec dy(ex.m);
      for (int i = 0; i < ex.m; ++i) dy[i] = (y[i] - y_prev_check[i]) * sc.e[i] / sc.c;
      const double ndy = inf_norm(dy);
      if (ndy > 1e-14) {
        Vec atdy = Vec::Zero(n);
        for (const Tri& t : ex.a_tris) atdy[t.c] += t.v * dy[t.r];
        double support = 0;
        bool usable = true;
        for (int i = 0; i < ex.m; ++i) {
          const double pos = std::max(dy[i], 0.0), neg = std::min(dy[i], 0.0);
          if (pos > opts.eps_infeasible * ndy && !std::isfinite(ex.up[i])) { usable = false; break; }
          if (-neg > opts.eps_infeasible * ndy && !std::isfinite(ex.lo[i])) { usable = false; break; }
          if (std::isfinite(ex.up[i])) support += ex.up[i] * pos;
          if (std::isfinite(ex.lo[i])) support += ex.lo[i] * neg;
        }
        if (usable && inf_norm(atdy) <= opts.eps_infeasible * ndy &&
            support <= -opts.eps_infeasible * ndy) {
          infeasible = true;
          break;
        }
      }
      y_prev_check = y;
    }

    if (opts.adaptive_rho) {
      const double sp = rp / std::max(std::max(np_ax, np_z), 1e-12);
      const double sd = rd / std::max(std::max({nd_px, nd_q, nd_aty}), 1e-12);
      const double ratio = std::sqrt(sp / std::max(sd, 1e-16));
      if (std::isfinite(ratio) && (ratio > 5.0 || ratio < 0.2)) {
        rho_bar = clip_pos(rho_bar * ratio, 1e-6, 1e6);
        rho = rho_vec(rho_bar);
        ldlt.compute(build_kkt(P, A, opts.sigma, rho));
        if (ldlt.info() != Eigen::Success)
          throw std::runtime_error("solve_qp: KKT refactorisation failed");
      }
    }
  }

  res.iterations = iter;
  if (infeasible) {
    res.status = SolveStatus::infeasible;
    return res;
  }

  // Unscale.
  res.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) res.x[j] = sc.d[j] * x[j];
  res.y.assign(qp.num_rows, 0.0);
  res.z_bound.assign(n, 0.0);
  for (int i = 0; i < qp.num_rows; ++i) res.y[i] = sc.e[i] * y[i] / sc.c;
  for (int j = 0; j < n; ++j) res.z_bound[j] = sc.e[qp.num_rows + j] * y[qp.num_rows + j] / sc.c;

  Audit admm_audit = audit_point(qp, res.x, res.y);
  res.kkt = admm_audit.res;

  if (opts.polish) {
    PolishOutcome pol = polish_solution(qp, ex, z, lo, up, opts);
    if (pol.ok) {
      Audit pol_audit = audit_point(qp, pol.x, pol.y);
      if (pol_audit.worst < admm_audit.worst) {
        res.x = pol.x;
        res.y = pol.y;
        res.z_bound = pol.z_bound;
        res.kkt = pol_audit.res;
        res.polished = true;
      }
    }
  }

  res.objective = qp_objective(qp, res.x);
  const double worst = std::max({res.kkt.primal, res.kkt.stationarity, res.kkt.complementarity});
  if (converged || worst <= std::max(opts.eps_abs * 1e3, 1e-9)) {
    res.status = SolveStatus::optimal;
  } else {
    res.status = SolveStatus::iteration_limit;
  }
  return res;
}

}  // namespace privshape
