#pragma once
// Offline privacy scoring: empirical PDFs with additive smoothing, Shannon
// entropy, i.i.d. mutual information, and the stationary first-order Markov
// mutual-information upper bound.
//
// All estimates are pooled across time: a single trajectory yields one sample
// per step, so per-step distributions are assumed identical and samples are
// pooled into shared histograms. MI values are reported in bits.

#include <cstddef>
#include <vector>

#include "privshape/core.hpp"

namespace privshape {

// Dense 1-D or 2-D smoothed histogram estimate.
// Cell probability = (count + eps) / (k + eps * #cells).
struct EmpiricalPdf {
  int dims = 1;
  int nx = 0;  // bins on the first axis
  int ny = 0;  // bins on the second axis (2-D only)
  std::vector<double> p;  // row-major for 2-D: p[i*ny + j], i,j 0-based
  std::size_t samples = 0;
  double eps = 0.0;

  double n_eps() const { return static_cast<double>(samples) + eps * cell_count(); }
  int cell_count() const { return dims == 1 ? nx : nx * ny; }
  double at(int i) const { return p[static_cast<std::size_t>(i)]; }
  double at(int i, int j) const { return p[static_cast<std::size_t>(i) * ny + j]; }
};

EmpiricalPdf estimate_pdf(const std::vector<double>& xs, const Bins& bins, double eps);
EmpiricalPdf estimate_pdf(const std::vector<double>& xs, const std::vector<double>& ys,
                          const BinningScheme& binning, double eps);

// Shannon entropy -sum p log2 p with 0 log 0 := 0.
double entropy(const EmpiricalPdf& pdf);
double entropy_of_probs(const std::vector<double>& probs);

// MI of an explicit joint probability matrix (row-major m x n) against its own
// marginals. Used for closed-form distribution-level computations.
double mi_of_joint(const std::vector<double>& joint, int m, int n);

// Pooled i.i.d. MI between two aligned sequences (bits).
double mi_iid(const std::vector<double>& xs, const std::vector<double>& ys,
              const BinningScheme& binning, double eps);

// Stationary first-order Markov MI bound (bits):
//   (1/k) [ (k-1) * I((X_t,X_{t-1});(Y_t,Y_{t-1})) - (k-2) * I(X_{t-1};Y_{t-1}) ]
// with both terms estimated from the pooled histogram of consecutive-step
// tuples (t = 2..k); the single-step term uses the tuple histogram's
// trailing-slot marginal so every entropy derives from one distribution.
// Pairwise MI expands as entropies of the 4-, 2- and 1-D histograms.
double mi_markov(const std::vector<double>& xs, const std::vector<double>& ys,
                 const BinningScheme& binning, double eps);

struct MiReport {
  double iid_mi_bits = 0.0;
  double markov_mi_bits = 0.0;
  double entropy_x_bits = 0.0;
  std::size_t k = 0;
};

MiReport score_pair(const std::vector<double>& xs, const std::vector<double>& ys,
                    const BinningScheme& binning, double eps);

}  // namespace privshape
