#include "privshape/miqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace privshape {

namespace {

struct Node {
  std::vector<signed char> fixed;  // per binary: -1 free, 0, 1
  std::vector<double> x, y;        // this node's relaxation solution
  double bound = -std::numeric_limits<double>::infinity();
  int id = 0;
};

struct QueueEntry {
  double bound;
  int id;
  std::size_t slot;
  bool operator>(const QueueEntry& o) const {
    if (bound != o.bound) return bound > o.bound;
    return id > o.id;
  }
};

void apply_fixings(QuadraticProgram& work, const QuadraticProgram& base,
                   const std::vector<GatedPair>& pairs,
                   const std::vector<signed char>& fixed) {
  work.var_lo = base.var_lo;
  work.var_hi = base.var_hi;
  for (std::size_t b = 0; b < fixed.size(); ++b) {
    if (fixed[b] < 0) continue;
    const int var = base.binaries[b];
    const double v = static_cast<double>(fixed[b]);
    work.var_lo[var] = v;
    work.var_hi[var] = v;
    for (const GatedPair& p : pairs) {
      if (p.binary != var) continue;
      if (fixed[b] == 0) {
        work.var_lo[p.p_charge] = 0;
        work.var_hi[p.p_charge] = 0;
      } else {
        work.var_lo[p.p_discharge] = 0;
        work.var_hi[p.p_discharge] = 0;
      }
    }
  }
}

// Index of the binary whose relaxation violates integrality the most, or
// -1 when the point is acceptable as-is.  Gated binaries are acceptable
// when their power pair does not overlap (product within tolerance);
// plain binaries when they sit within bin_tol of {0,1}.
int most_fractional(const QuadraticProgram& base, const std::vector<GatedPair>& pairs,
                    const std::vector<double>& x, const MiqpOptions& opts,
                    const std::vector<signed char>& fixed) {
  int best = -1;
  double best_frac = 0;
  for (std::size_t b = 0; b < base.binaries.size(); ++b) {
    if (fixed[b] >= 0) continue;
    const int var = base.binaries[b];
    const GatedPair* pair = nullptr;
    for (const GatedPair& p : pairs)
      if (p.binary == var) { pair = &p; break; }
    double frac;
    if (pair) {
      if (std::abs(x[pair->p_charge] * x[pair->p_discharge]) <= opts.comp_tol) continue;
      const double fc = x[pair->p_charge] / std::max(pair->charge_cap, 1e-12);
      const double fd = x[pair->p_discharge] / std::max(pair->discharge_cap, 1e-12);
      frac = std::min(fc, fd);
    } else {
      frac = std::min(x[var], 1.0 - x[var]);
      if (frac <= opts.bin_tol) continue;
    }
    if (best < 0 || frac > best_frac) {
      best = static_cast<int>(b);
      best_frac = frac;
    }
  }
  return best;
}

// Consistent 0/1 values for all binaries given a relaxation point.
std::vector<signed char> rounded_fixings(const QuadraticProgram& base,
                                         const std::vector<GatedPair>& pairs,
                                         const std::vector<double>& x,
                                         const std::vector<signed char>& fixed) {
  std::vector<signed char> r = fixed;
  for (std::size_t b = 0; b < base.binaries.size(); ++b) {
    if (r[b] >= 0) continue;
    const int var = base.binaries[b];
    const GatedPair* pair = nullptr;
    for (const GatedPair& p : pairs)
      if (p.binary == var) { pair = &p; break; }
    if (pair)
      r[b] = (x[pair->p_charge] >= x[pair->p_discharge]) ? 1 : 0;
    else
      r[b] = (x[var] >= 0.5) ? 1 : 0;
  }
  return r;
}

}  // namespace

MiqpResult solve_miqp(const QuadraticProgram& qp, const std::vector<GatedPair>& pairs,
                      const MiqpOptions& opts) {
  qp.validate();
  if (qp.binaries.size() > 64)
    throw std::invalid_argument("solve_miqp: more than 64 binary variables");

  MiqpResult res;
  const std::size_t nb = qp.binaries.size();

  if (nb == 0) {
    SolveResult r = solve_qp(qp, opts.qp);
    res.status = r.status;
    res.x = r.x;
    res.y = r.y;
    res.objective = r.objective;
    res.best_bound = r.objective;
    res.nodes_explored = 1;
    res.incumbent_found = (r.status == SolveStatus::optimal);
    res.kkt = r.kkt;
    return res;
  }

  QuadraticProgram work = qp;

  std::vector<Node> nodes;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> open;
  int next_id = 0;

  double ub = std::numeric_limits<double>::infinity();
  bool have_incumbent = false;
  std::vector<double> inc_x, inc_y;
  KktResiduals inc_kkt;
  bool any_feasible_relaxation = false;
  bool dropped_subtree = false;  // a child QP died unresolved; the tree is incomplete
  double pruned_bound = std::numeric_limits<double>::quiet_NaN();
  int explored = 0;

  auto solve_node = [&](const std::vector<signed char>& fixed, const std::vector<double>* wx,
                        const std::vector<double>* wy) {
    apply_fixings(work, qp, pairs, fixed);
    return solve_qp(work, opts.qp, wx, wy);
  };

  auto gap_closed = [&](double lb) {
    return ub - lb <= opts.rel_gap * std::max(1.0, std::abs(ub));
  };

  // Accepts an integral-enough node solution as the incumbent: binaries
  // snapped to their implied values, objective re-evaluated at the
  // snapped point so binary objective terms (if any) are counted exactly.
  auto try_accept = [&](const SolveResult& r, const std::vector<signed char>& fixed) {
    if (r.status != SolveStatus::optimal) return false;
    if (most_fractional(qp, pairs, r.x, opts, fixed) >= 0) return false;
    std::vector<double> snapped = r.x;
    std::vector<signed char> rf = rounded_fixings(qp, pairs, r.x, fixed);
    for (std::size_t b = 0; b < nb; ++b) snapped[qp.binaries[b]] = static_cast<double>(rf[b]);
    const double obj = qp_objective(qp, snapped);
    if (obj < ub) {
      ub = obj;
      inc_x = std::move(snapped);
      inc_y = r.y;
      inc_kkt = r.kkt;
      have_incumbent = true;
    }
    return true;
  };

  auto push_node = [&](Node&& node) {
    const double bound = node.bound;
    const int id = node.id;
    nodes.push_back(std::move(node));
    open.push({bound, id, nodes.size() - 1});
  };

  // Root node.
  {
    Node root;
    root.fixed.assign(nb, -1);
    root.id = next_id++;
    SolveResult r = solve_node(root.fixed, nullptr, nullptr);
    ++explored;
    if (r.status == SolveStatus::infeasible) {
      res.status = SolveStatus::infeasible;
      res.nodes_explored = explored;
      return res;
    }
    if (r.status != SolveStatus::optimal) {
      res.status = SolveStatus::iteration_limit;
      res.nodes_explored = explored;
      return res;
    }
    any_feasible_relaxation = true;
    root.bound = r.objective;
    if (!try_accept(r, root.fixed)) {
      // Seed an incumbent by rounding the root relaxation.
      std::vector<signed char> rf = rounded_fixings(qp, pairs, r.x, root.fixed);
      SolveResult h = solve_node(rf, &r.x, &r.y);
      if (h.status == SolveStatus::optimal) try_accept(h, rf);
      root.x = std::move(r.x);
      root.y = std::move(r.y);
      if (!(have_incumbent && gap_closed(root.bound))) push_node(std::move(root));
    }
    if (have_incumbent && open.empty()) {
      res.status = SolveStatus::optimal;
      res.x = inc_x;
      res.y = inc_y;
      res.objective = ub;
      res.best_bound = std::min(root.bound, ub);
      res.nodes_explored = explored;
      res.incumbent_found = true;
      res.kkt = inc_kkt;
      return res;
    }
  }

  while (!open.empty() && explored < opts.node_limit) {
    const QueueEntry top = open.top();
    open.pop();
    Node node = std::move(nodes[top.slot]);
    if (have_incumbent && gap_closed(node.bound)) {
      // Best-first order: every remaining open node has an equal or worse
      // bound, so the whole queue is pruned.
      pruned_bound = node.bound;
      open = {};
      break;
    }
    const int branch = most_fractional(qp, pairs, node.x, opts, node.fixed);
    if (branch < 0) continue;  // already integral (accepted when it was solved)
    for (int side = 0; side <= 1; ++side) {
      Node child;
      child.fixed = node.fixed;
      child.fixed[branch] = static_cast<signed char>(side);
      child.id = next_id++;
      SolveResult cr = solve_node(child.fixed, &node.x, &node.y);
      ++explored;
      if (cr.status == SolveStatus::iteration_limit) dropped_subtree = true;
      if (cr.status != SolveStatus::optimal) continue;
      any_feasible_relaxation = true;
      child.bound = cr.objective;
      if (have_incumbent && gap_closed(child.bound)) continue;
      if (most_fractional(qp, pairs, cr.x, opts, child.fixed) < 0) {
        try_accept(cr, child.fixed);
        continue;
      }
      child.x = std::move(cr.x);
      child.y = std::move(cr.y);
      push_node(std::move(child));
    }
  }

  double lb = ub;
  if (!open.empty()) lb = open.top().bound;  // minimum bound among unexplored nodes
  else if (!std::isnan(pruned_bound)) lb = pruned_bound;
  res.best_bound = std::min(lb, ub);
  res.nodes_explored = explored;
  res.incumbent_found = have_incumbent;
  if (have_incumbent) {
    res.x = inc_x;
    res.y = inc_y;
    res.objective = ub;
    res.kkt = inc_kkt;
    const bool proved = !dropped_subtree && (open.empty() || gap_closed(res.best_bound));
    res.status = proved ? SolveStatus::optimal : SolveStatus::iteration_limit;
  } else {
    res.status = any_feasible_relaxation ? SolveStatus::iteration_limit : SolveStatus::infeasible;
  }
  return res;
}

}  // namespace privshape
