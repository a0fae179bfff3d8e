// Convex quadratic solver: tiny closed-form programs, random instances
// against a brute-force active-set enumeration, independent optimality-
// residual audits, infeasibility detection, determinism and warm starts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include "privshape/qp.hpp"
#include "privshape/qp_solver.hpp"
#include "privshape/rng.hpp"

using namespace privshape;

namespace {

struct DenseQp {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;  // rows a_i' x <= u_i
  Eigen::VectorXd u;
};

// Globally optimal objective of min 1/2 x'Px + q'x s.t. Ax <= u by
// enumerating every candidate active set and solving its equality-
// constrained KKT system.
double active_set_enumeration(const DenseQp& d) {
  const int n = static_cast<int>(d.P.rows());
  const int mrows = static_cast<int>(d.A.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << mrows); ++mask) {
    std::vector<int> active;
    for (int r = 0; r < mrows; ++r)
      if (mask & (1u << r)) active.push_back(r);
    const int na = static_cast<int>(active.size());
    Eigen::MatrixXd kkt(n + na, n + na);
    kkt.setZero();
    kkt.topLeftCorner(n, n) = d.P;
    for (int k = 0; k < na; ++k) {
      kkt.block(n + k, 0, 1, n) = d.A.row(active[static_cast<std::size_t>(k)]);
      kkt.block(0, n + k, n, 1) = d.A.row(active[static_cast<std::size_t>(k)]).transpose();
    }
    Eigen::VectorXd rhs(n + na);
    rhs.head(n) = -d.q;
    for (int k = 0; k < na; ++k) rhs[n + k] = d.u[active[static_cast<std::size_t>(k)]];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd sol = lu.solve(rhs);
    Eigen::VectorXd x = sol.head(n);
    bool feasible = true;
    for (int r = 0; r < mrows; ++r)
      if (d.A.row(r).dot(x) > d.u[r] + 1e-8) feasible = false;
    if (!feasible) continue;
    best = std::min(best, 0.5 * x.dot(d.P * x) + d.q.dot(x));
  }
  return best;
}

}  // namespace

TEST_CASE("scalar program with an active bound") {
  QuadraticProgram qp;
  const int x = qp.add_var(1.0, kQpInf);  // x >= 1
  qp.add_quad(x, x, 2.0);                 // objective x^2
  qp.validate();
  SolveResult res = solve_qp(qp);
  REQUIRE(res.status == SolveStatus::optimal);
  CHECK(std::abs(res.x[0] - 1.0) <= 1e-8);
  CHECK(std::abs(res.objective - 1.0) <= 1e-8);
  CHECK(res.kkt.primal <= 1e-6);
  CHECK(res.kkt.stationarity <= 1e-6);
  CHECK(res.kkt.complementarity <= 1e-6);
}

TEST_CASE("projection of an interior point onto a simplex is the point itself") {
  QuadraticProgram qp;
  VarSpan x = qp.add_vars(3, 0.0, 1.0);
  const std::vector<double> c{0.2, 0.3, 0.5};  // interior of the simplex
  for (int i = 0; i < 3; ++i) {
    qp.add_quad(x[i], x[i], 2.0);
    qp.add_linear(x[i], -2.0 * c[static_cast<std::size_t>(i)]);
  }
  const int row = qp.add_row(1.0, 1.0);
  for (int i = 0; i < 3; ++i) qp.row_term(row, x[i], 1.0);
  qp.validate();
  SolveResult res = solve_qp(qp);
  REQUIRE(res.status == SolveStatus::optimal);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(res.x[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)]) <= 1e-7);
}

TEST_CASE("equality row pins the solution") {
  QuadraticProgram qp;
  const int x = qp.add_var(-kQpInf, kQpInf);
  qp.add_quad(x, x, 2.0);
  qp.add_row(3.0, 3.0, {{x, 1.0}});
  SolveResult res = solve_qp(qp);
  REQUIRE(res.status == SolveStatus::optimal);
  CHECK(std::abs(res.x[0] - 3.0) <= 1e-8);
  CHECK(std::abs(res.objective - 9.0) <= 1e-6);
}

TEST_CASE("random dense programs match active-set enumeration") {
  Rng rng(314159);
  for (int inst = 0; inst < 5; ++inst) {
    const int n = 20, mrows = 10;
    Eigen::MatrixXd R(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R(i, j) = rng.normal();
    DenseQp d;
    d.P = R.transpose() * R / n + Eigen::MatrixXd::Identity(n, n);
    d.q = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.normal(); });
    d.A = Eigen::MatrixXd::NullaryExpr(mrows, n, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
    Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.normal(); });
    d.u = d.A * x0 + Eigen::VectorXd::NullaryExpr(mrows, [&](Eigen::Index) { return std::abs(rng.normal()); });

    QuadraticProgram qp;
    VarSpan xs = qp.add_vars(n, -kQpInf, kQpInf);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j)
        if (d.P(i, j) != 0.0) qp.add_quad(xs[i], xs[j], d.P(i, j));
      qp.add_linear(xs[i], d.q[i]);
    }
    for (int r = 0; r < mrows; ++r) {
      const int row = qp.add_row(-kQpInf, d.u[r]);
      for (int i = 0; i < n; ++i) qp.row_term(row, xs[i], d.A(r, i));
    }
    qp.validate();
    SolveResult res = solve_qp(qp);
    REQUIRE(res.status == SolveStatus::optimal);
    const double oracle = active_set_enumeration(d);
    CHECK(std::abs(res.objective - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)));
    CHECK(res.kkt.primal <= 1e-6);
    CHECK(res.kkt.stationarity <= 1e-6);
    CHECK(res.kkt.complementarity <= 1e-6);
    // The reported residuals come from an audit that can be reproduced.
    KktResiduals audit = check_kkt(qp, res.x, res.y);
    CHECK(audit.primal <= 1e-6);
    CHECK(audit.stationarity <= 1e-6);
  }
}

TEST_CASE("contradictory constraints yield an infeasibility certificate") {
  QuadraticProgram qp;
  const int x = qp.add_var(-kQpInf, 0.0);   // x <= 0
  qp.add_quad(x, x, 2.0);
  qp.add_row(1.0, kQpInf, {{x, 1.0}});      // x >= 1
  SolveResult res = solve_qp(qp);
  CHECK(res.status == SolveStatus::infeasible);

  QuadraticProgram qp2;
  const int a = qp2.add_var(0.0, 10.0);
  const int b = qp2.add_var(0.0, 10.0);
  qp2.add_quad(a, a, 2.0);
  qp2.add_quad(b, b, 2.0);
  qp2.add_row(5.0, 5.0, {{a, 1.0}, {b, 1.0}});
  qp2.add_row(-kQpInf, 1.0, {{a, 1.0}});
  qp2.add_row(-kQpInf, 1.0, {{b, 1.0}});  // a+b=5 impossible with a,b <= 1
  SolveResult res2 = solve_qp(qp2);
  CHECK(res2.status == SolveStatus::infeasible);
}

TEST_CASE("identical programs solve to bit-identical results") {
  auto build = [] {
    QuadraticProgram qp;
    VarSpan x = qp.add_vars(6, -2.0, 2.0);
    for (int i = 0; i < 6; ++i) {
      qp.add_quad(x[i], x[i], 2.0 + i);
      qp.add_linear(x[i], (i % 2) ? 1.5 : -0.5);
    }
    qp.add_quad(x[0], x[3], 0.4);
    qp.add_quad(x[1], x[4], -0.3);
    const int row = qp.add_row(1.0, 2.5);
    for (int i = 0; i < 6; ++i) qp.row_term(row, x[i], 1.0);
    return qp;
  };
  QuadraticProgram qp1 = build();
  QuadraticProgram qp2 = build();
  SolveResult r1 = solve_qp(qp1);
  SolveResult r2 = solve_qp(qp2);
  REQUIRE(r1.status == SolveStatus::optimal);
  REQUIRE(r1.status == r2.status);
  CHECK(r1.iterations == r2.iterations);
  CHECK(r1.objective == r2.objective);
  for (std::size_t i = 0; i < r1.x.size(); ++i) CHECK(r1.x[i] == r2.x[i]);
  for (std::size_t i = 0; i < r1.y.size(); ++i) CHECK(r1.y[i] == r2.y[i]);
}

TEST_CASE("warm starts reach the same optimum") {
  Rng rng(2718);
  QuadraticProgram qp;
  VarSpan x = qp.add_vars(8, 0.0, 5.0);
  for (int i = 0; i < 8; ++i) {
    qp.add_quad(x[i], x[i], 1.0 + 0.25 * i);
    qp.add_linear(x[i], rng.uniform(-2.0, 2.0));
  }
  const int row = qp.add_row(4.0, 4.0);
  for (int i = 0; i < 8; ++i) qp.row_term(row, x[i], 1.0);
  SolveResult cold = solve_qp(qp);
  REQUIRE(cold.status == SolveStatus::optimal);

  // Warm start from the solved point and from a perturbed point.
  SolveResult warm = solve_qp(qp, {}, &cold.x, &cold.y);
  REQUIRE(warm.status == SolveStatus::optimal);
  CHECK(std::abs(warm.objective - cold.objective) <= 1e-7 * std::max(1.0, std::abs(cold.objective)));
  std::vector<double> bumped = cold.x;
  for (double& v : bumped) v = std::min(5.0, std::max(0.0, v + rng.uniform(-0.3, 0.3)));
  SolveResult warm2 = solve_qp(qp, {}, &bumped, &cold.y);
  REQUIRE(warm2.status == SolveStatus::optimal);
  CHECK(std::abs(warm2.objective - cold.objective) <= 1e-7 * std::max(1.0, std::abs(cold.objective)));
  for (std::size_t i = 0; i < cold.x.size(); ++i) CHECK(std::abs(warm2.x[i] - cold.x[i]) <= 1e-5);
}

TEST_CASE("objective evaluation matches a hand computation") {
  QuadraticProgram qp;
  VarSpan x = qp.add_vars(2, -kQpInf, kQpInf);
  qp.add_quad(x[0], x[0], 2.0);   // contributes x0^2
  qp.add_quad(x[0], x[1], 1.0);   // contributes x0*x1
  qp.add_quad(x[1], x[1], 4.0);   // contributes 2*x1^2
  qp.add_linear(x[0], -1.0);
  qp.constant = 0.75;
  const std::vector<double> point{2.0, 3.0};
  // 4 + 6 + 18 - 2 + 0.75
  CHECK(qp_objective(qp, point) == doctest::Approx(26.75).epsilon(1e-12));
}

TEST_CASE("iteration cap reports rather than lies") {
  QuadraticProgram qp;
  VarSpan x = qp.add_vars(12, -10.0, 10.0);
  Rng rng(5);
  for (int i = 0; i < 12; ++i) {
    qp.add_quad(x[i], x[i], 1.0);
    qp.add_linear(x[i], rng.uniform(-1.0, 1.0));
    if (i > 0) qp.add_quad(x[i - 1], x[i], 0.49);
  }
  const int row = qp.add_row(2.0, 2.0);
  for (int i = 0; i < 12; ++i) qp.row_term(row, x[i], 1.0);
  SolverOptions strangled;
  strangled.max_iter = 3;
  strangled.check_interval = 1;
  strangled.polish = false;
  SolveResult res = solve_qp(qp, strangled);
  CHECK(res.status == SolveStatus::iteration_limit);
  // The same program with room to work converges.
  SolveResult ok = solve_qp(qp);
  CHECK(ok.status == SolveStatus::optimal);
  CHECK(ok.kkt.stationarity <= 1e-6);
}

TEST_CASE("program validation and dump") {
  QuadraticProgram qp;
  const int x = qp.add_var(0.0, 1.0);
  qp.add_quad(x, x, 1.0);
  qp.add_row(0.0, 1.0, {{x, 1.0}});
  qp.validate();

  QuadraticProgram bad = qp;
  bad.var_lo[0] = 2.0;  // inverted bounds
  CHECK_THROWS(bad.validate());
  QuadraticProgram bad2 = qp;
  bad2.rows.push_back({0, 7, 1.0});  // column out of range
  CHECK_THROWS(bad2.validate());
  QuadraticProgram bad3 = qp;
  bad3.binaries.push_back(0);
  bad3.var_hi[0] = 2.0;  // binary outside [0,1]
  CHECK_THROWS(bad3.validate());

  std::ostringstream dump;
  qp.dump_triplets(dump);
  const std::string text = dump.str();
  CHECK(text.find("quad 1") != std::string::npos);
  CHECK(text.find("rows 1") != std::string::npos);
  CHECK(text.find("var_bounds 1") != std::string::npos);
}
