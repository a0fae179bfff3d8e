#include "privshape/mi_metrics.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace privshape {

namespace {

constexpr double kLog2 = 0.6931471805599453094;  // ln 2
constexpr double kNegClip = 1e-12;

double log2_safe(double v) { return std::log(v) / kLog2; }

double clip_mi(double v) {
  if (v < 0.0 && v > -kNegClip) return 0.0;
  return v < 0.0 ? 0.0 : v;  // estimator guarantees nonnegativity; guard float dust
}

void check_aligned(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::runtime_error("sequence length mismatch: " + std::to_string(xs.size()) + " vs " +
                             std::to_string(ys.size()));
}

}  // namespace

EmpiricalPdf estimate_pdf(const std::vector<double>& xs, const Bins& bins, double eps) {
  if (xs.empty()) throw std::runtime_error("estimate_pdf: empty sample sequence");
  EmpiricalPdf pdf;
  pdf.dims = 1;
  pdf.nx = bins.count;
  pdf.samples = xs.size();
  pdf.eps = eps;
  std::vector<double> counts(static_cast<std::size_t>(bins.count), 0.0);
  for (double v : xs) counts[static_cast<std::size_t>(bins.index(v) - 1)] += 1.0;
  const double denom = static_cast<double>(xs.size()) + eps * bins.count;
  pdf.p.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) pdf.p[i] = (counts[i] + eps) / denom;
  return pdf;
}

EmpiricalPdf estimate_pdf(const std::vector<double>& xs, const std::vector<double>& ys,
                          const BinningScheme& binning, double eps) {
  check_aligned(xs, ys);
  if (xs.empty()) throw std::runtime_error("estimate_pdf: empty sample sequence");
  EmpiricalPdf pdf;
  pdf.dims = 2;
  pdf.nx = binning.x.count;
  pdf.ny = binning.y.count;
  pdf.samples = xs.size();
  pdf.eps = eps;
  const std::size_t cells = static_cast<std::size_t>(pdf.nx) * pdf.ny;
  std::vector<double> counts(cells, 0.0);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const int i = binning.x.index(xs[t]) - 1;
    const int j = binning.y.index(ys[t]) - 1;
    counts[static_cast<std::size_t>(i) * pdf.ny + j] += 1.0;
  }
  const double denom = static_cast<double>(xs.size()) + eps * static_cast<double>(cells);
  pdf.p.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) pdf.p[c] = (counts[c] + eps) / denom;
  return pdf;
}

double entropy_of_probs(const std::vector<double>& probs) {
  double h = 0.0;
  for (double v : probs)
    if (v > 0.0) h -= v * log2_safe(v);
  return h;
}

double entropy(const EmpiricalPdf& pdf) { return entropy_of_probs(pdf.p); }

double mi_of_joint(const std::vector<double>& joint, int m, int n) {
  if (static_cast<std::size_t>(m) * n != joint.size())
    throw std::runtime_error("mi_of_joint: matrix shape mismatch");
  std::vector<double> px(m, 0.0), py(n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      px[i] += joint[static_cast<std::size_t>(i) * n + j];
      py[j] += joint[static_cast<std::size_t>(i) * n + j];
    }
  double mi = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double pij = joint[static_cast<std::size_t>(i) * n + j];
      if (pij > 0.0) mi += pij * log2_safe(pij / (px[i] * py[j]));
    }
  return clip_mi(mi);
}

double mi_iid(const std::vector<double>& xs, const std::vector<double>& ys,
              const BinningScheme& binning, double eps) {
  check_aligned(xs, ys);
  if (xs.size() < 2) throw std::runtime_error("mi_iid: need at least 2 samples");
  const EmpiricalPdf joint = estimate_pdf(xs, ys, binning, eps);
  return mi_of_joint(joint.p, joint.nx, joint.ny);
}

namespace {

// Sparse tuple histogram keyed on up to four 0-based bin indices packed into
// 16-bit fields. Entropies account analytically for the unoccupied cells that
// additive smoothing populates.
using TupleCounts = std::unordered_map<std::uint64_t, double>;

std::uint64_t pack4(int a, int b, int c, int d) {
  return (static_cast<std::uint64_t>(a) << 48) | (static_cast<std::uint64_t>(b) << 32) |
         (static_cast<std::uint64_t>(c) << 16) | static_cast<std::uint64_t>(d);
}

// Entropy of the distribution with probabilities (count + eps*collapse)/total
// on occupied cells and eps*collapse/total on each of the remaining cells.
double smoothed_entropy(const TupleCounts& counts, double cell_count, double collapse, double eps,
                        double total) {
  double h = 0.0;
  const double base = eps * collapse;
  for (const auto& [key, c] : counts) {
    (void)key;
    const double p = (c + base) / total;
    if (p > 0.0) h -= p * log2_safe(p);
  }
  const double unoccupied = cell_count - static_cast<double>(counts.size());
  if (unoccupied > 0.0 && base > 0.0) {
    const double p0 = base / total;
    h -= unoccupied * p0 * log2_safe(p0);
  }
  return h;
}

}  // namespace

double mi_markov(const std::vector<double>& xs, const std::vector<double>& ys,
                 const BinningScheme& binning, double eps) {
  check_aligned(xs, ys);
  const std::size_t k = xs.size();
  if (k < 3) throw std::runtime_error("mi_markov: need at least 3 samples");

  const int m = binning.x.count;
  const int n = binning.y.count;

  // Pooled consecutive-step tuples (x_t, x_{t-1}, y_t, y_{t-1}), t = 2..k.
  TupleCounts h4, hxp, hyp, hx1, hy1, hxy1;
  std::vector<int> ix(k), iy(k);
  for (std::size_t t = 0; t < k; ++t) {
    ix[t] = binning.x.index(xs[t]) - 1;
    iy[t] = binning.y.index(ys[t]) - 1;
  }
  for (std::size_t t = 1; t < k; ++t) {
    const int xt = ix[t], xp = ix[t - 1], yt = iy[t], yp = iy[t - 1];
    h4[pack4(xt, xp, yt, yp)] += 1.0;
    hxp[pack4(0, 0, xt, xp)] += 1.0;
    hyp[pack4(0, 0, yt, yp)] += 1.0;
    hx1[pack4(0, 0, 0, xp)] += 1.0;
    hy1[pack4(0, 0, 0, yp)] += 1.0;
    hxy1[pack4(0, 0, xp, yp)] += 1.0;
  }

  const double dm = m, dn = n;
  const double cells4 = dm * dm * dn * dn;
  const double pairs = static_cast<double>(k - 1);
  const double total = pairs + eps * cells4;

  // Marginals of the smoothed 4-D histogram: collapsing an axis pools the
  // smoothing mass of the collapsed cells.
  const double h_joint4 = smoothed_entropy(h4, cells4, 1.0, eps, total);
  const double h_xpair = smoothed_entropy(hxp, dm * dm, dn * dn, eps, total);
  const double h_ypair = smoothed_entropy(hyp, dn * dn, dm * dm, eps, total);
  const double h_x1 = smoothed_entropy(hx1, dm, dm * dn * dn, eps, total);
  const double h_y1 = smoothed_entropy(hy1, dn, dm * dm * dn, eps, total);
  const double h_xy1 = smoothed_entropy(hxy1, dm * dn, dm * dn, eps, total);

  const double mi_pair = h_xpair + h_ypair - h_joint4;
  const double mi_single = h_x1 + h_y1 - h_xy1;
  const double dk = static_cast<double>(k);
  return clip_mi(((dk - 1.0) * mi_pair - (dk - 2.0) * mi_single) / dk);
}

MiReport score_pair(const std::vector<double>& xs, const std::vector<double>& ys,
                    const BinningScheme& binning, double eps) {
  MiReport report;
  report.k = xs.size();
  report.iid_mi_bits = mi_iid(xs, ys, binning, eps);
  report.markov_mi_bits = mi_markov(xs, ys, binning, eps);
  report.entropy_x_bits = entropy(estimate_pdf(xs, binning.x, eps));
  return report;
}

}  // namespace privshape
