// Privacy scoring estimators: smoothed histograms, entropy, pooled i.i.d.
// mutual information and the first-order Markov bound, each checked against
// independent reimplementations that work from raw counts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "privshape/mi_metrics.hpp"
#include "privshape/rng.hpp"

using namespace privshape;

namespace {

double log2_of(double v) { return std::log(v) / std::log(2.0); }

// Independent i.i.d. MI oracle: smoothed joint counts, marginals by explicit
// summation, then the literal double sum p_ij * log2(p_ij / (p_i * p_j)).
double oracle_mi_iid(const std::vector<double>& xs, const std::vector<double>& ys,
                     const BinningScheme& binning, double eps) {
  const int m = binning.x.count, n = binning.y.count;
  std::vector<double> joint(static_cast<std::size_t>(m) * n, 0.0);
  for (std::size_t t = 0; t < xs.size(); ++t)
    joint[static_cast<std::size_t>(binning.x.index(xs[t]) - 1) * n + (binning.y.index(ys[t]) - 1)] +=
        1.0;
  const double total = static_cast<double>(xs.size()) + eps * m * n;
  for (double& c : joint) c = (c + eps) / total;
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
      if (pij > 0.0) mi += pij * log2_of(pij / (px[i] * py[j]));
    }
  return mi;
}

// The same quantity via the entropy identity H(X)+H(Y)-H(X,Y), with the
// marginals again summed out of the smoothed joint.
double oracle_mi_iid_entropy(const std::vector<double>& xs, const std::vector<double>& ys,
                             const BinningScheme& binning, double eps) {
  const int m = binning.x.count, n = binning.y.count;
  std::vector<double> joint(static_cast<std::size_t>(m) * n, 0.0);
  for (std::size_t t = 0; t < xs.size(); ++t)
    joint[static_cast<std::size_t>(binning.x.index(xs[t]) - 1) * n + (binning.y.index(ys[t]) - 1)] +=
        1.0;
  const double total = static_cast<double>(xs.size()) + eps * m * n;
  for (double& c : joint) c = (c + eps) / total;
  std::vector<double> px(m, 0.0), py(n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      px[i] += joint[static_cast<std::size_t>(i) * n + j];
      py[j] += joint[static_cast<std::size_t>(i) * n + j];
    }
  return entropy_of_probs(px) + entropy_of_probs(py) - entropy_of_probs(joint);
}

// Independent Markov-bound oracle: dense 4-D histogram of consecutive-step
// tuples (x_t, x_{t-1}, y_t, y_{t-1}); every marginal obtained by literally
// summing the dense smoothed array; every entropy from the dense arrays.
double oracle_mi_markov(const std::vector<double>& xs, const std::vector<double>& ys,
                        const BinningScheme& binning, double eps) {
  const int m = binning.x.count, n = binning.y.count;
  const std::size_t k = xs.size();
  std::vector<int> ix(k), iy(k);
  for (std::size_t t = 0; t < k; ++t) {
    ix[t] = binning.x.index(xs[t]) - 1;
    iy[t] = binning.y.index(ys[t]) - 1;
  }
  const std::size_t cells = static_cast<std::size_t>(m) * m * n * n;
  std::vector<double> p4(cells, 0.0);
  auto at4 = [&](int xt, int xp, int yt, int yp) -> double& {
    return p4[((static_cast<std::size_t>(xt) * m + xp) * n + yt) * n + yp];
  };
  for (std::size_t t = 1; t < k; ++t) at4(ix[t], ix[t - 1], iy[t], iy[t - 1]) += 1.0;
  const double total = static_cast<double>(k - 1) + eps * static_cast<double>(cells);
  for (double& c : p4) c = (c + eps) / total;

  std::vector<double> pxx(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> pyy(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> px1(m, 0.0), py1(n, 0.0);
  std::vector<double> pxy1(static_cast<std::size_t>(m) * n, 0.0);
  for (int xt = 0; xt < m; ++xt)
    for (int xp = 0; xp < m; ++xp)
      for (int yt = 0; yt < n; ++yt)
        for (int yp = 0; yp < n; ++yp) {
          const double p = at4(xt, xp, yt, yp);
          pxx[static_cast<std::size_t>(xt) * m + xp] += p;
          pyy[static_cast<std::size_t>(yt) * n + yp] += p;
          px1[xp] += p;
          py1[yp] += p;
          pxy1[static_cast<std::size_t>(xp) * n + yp] += p;
        }
  const double mi_pair = entropy_of_probs(pxx) + entropy_of_probs(pyy) - entropy_of_probs(p4);
  const double mi_single = entropy_of_probs(px1) + entropy_of_probs(py1) - entropy_of_probs(pxy1);
  const double dk = static_cast<double>(k);
  return ((dk - 1.0) * mi_pair - (dk - 2.0) * mi_single) / dk;
}

std::vector<double> random_values(Rng& rng, std::size_t k, double lo, double hi) {
  std::vector<double> out(k);
  for (double& v : out) v = rng.uniform(lo, hi);
  return out;
}

}  // namespace

TEST_CASE("histogram estimate: plain and smoothed cell probabilities") {
  Bins two(0.0, 12.0, 2);
  EmpiricalPdf plain = estimate_pdf({0.1, 0.1, 11.9}, two, 0.0);
  CHECK(plain.p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(plain.p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  EmpiricalPdf smoothed = estimate_pdf({0.1, 0.1, 11.9}, two, 1.0);
  CHECK(smoothed.p[0] == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
  CHECK(smoothed.p[1] == doctest::Approx(2.0 / 5.0).epsilon(1e-12));
  CHECK(smoothed.n_eps() == doctest::Approx(5.0));
  CHECK_THROWS(estimate_pdf({}, two, 0.0));
  CHECK_THROWS(estimate_pdf({13.0}, two, 0.0));  // outside the binning range
}

TEST_CASE("histogram estimate: joint of identical sequences is diagonal") {
  BinningScheme b{Bins(0.0, 4.0, 4), Bins(0.0, 4.0, 4)};
  std::vector<double> xs{0.5, 1.5, 2.5, 3.5, 0.5};
  EmpiricalPdf joint = estimate_pdf(xs, xs, b, 0.0);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i != j) CHECK(joint.at(i, j) == 0.0);
      sum += joint.at(i, j);
    }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram estimate: probabilities sum to one and stay positive under smoothing") {
  Rng rng(5);
  BinningScheme b{Bins(0.0, 10.0, 5), Bins(0.0, 10.0, 7)};
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t k = 5 + trial * 13;
    auto xs = random_values(rng, k, 0.0, 10.0);
    auto ys = random_values(rng, k, 0.0, 10.0);
    const double eps = trial % 2 ? 0.0583 : 0.0;
    EmpiricalPdf pdf = estimate_pdf(xs, ys, b, eps);
    double sum = 0.0;
    for (double p : pdf.p) {
      sum += p;
      if (eps > 0.0) CHECK(p >= eps / pdf.n_eps() - 1e-15);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("entropy of canonical distributions") {
  CHECK(entropy_of_probs({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(entropy_of_probs({1.0, 0.0, 0.0}) == 0.0);
  CHECK(entropy_of_probs({0.75, 0.25}) == doctest::Approx(0.811278).epsilon(1e-6));
  Bins four(0.0, 4.0, 4);
  EmpiricalPdf uniform = estimate_pdf({0.5, 1.5, 2.5, 3.5}, four, 0.0);
  CHECK(entropy(uniform) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("joint-matrix MI basics") {
  // Perfect correlation over 2 symbols: 1 bit.
  CHECK(mi_of_joint({0.5, 0.0, 0.0, 0.5}, 2, 2) == doctest::Approx(1.0).epsilon(1e-12));
  // Product distribution: 0 bits.
  CHECK(mi_of_joint({0.25, 0.25, 0.25, 0.25}, 2, 2) == 0.0);
  CHECK_THROWS(mi_of_joint({0.5, 0.5}, 2, 2));
}

TEST_CASE("iid MI: degenerate and exact cases") {
  BinningScheme b{Bins(0.0, 4.0, 4), Bins(0.0, 4.0, 4)};
  std::vector<double> xs{0.5, 1.5, 2.5, 3.5, 0.5, 1.5, 2.5, 3.5};
  std::vector<double> flat(xs.size(), 2.0);
  CHECK(mi_iid(xs, flat, b, 0.0) == 0.0);           // constant output leaks nothing
  CHECK(mi_iid(xs, xs, b, 0.0) == doctest::Approx(2.0).epsilon(1e-12));  // identity leaks H(X)
  // One sample in each cell of a product set: empirically independent.
  std::vector<double> px{0.5, 0.5, 1.5, 1.5};
  std::vector<double> py{0.5, 1.5, 0.5, 1.5};
  BinningScheme b2{Bins(0.0, 2.0, 2), Bins(0.0, 2.0, 2)};
  CHECK(mi_iid(px, py, b2, 0.0) == 0.0);
  CHECK_THROWS(mi_iid({1.0}, {1.0}, b, 0.0));        // too short
  CHECK_THROWS(mi_iid({1.0, 2.0}, {1.0}, b, 0.0));   // length mismatch
}

TEST_CASE("iid MI equals the double-sum and entropy-identity oracles on random data") {
  Rng rng(20260821);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform_int(0, 198));
    const int mb = rng.uniform_int(2, 8);
    const int nb = rng.uniform_int(2, 8);
    BinningScheme b{Bins(0.0, 1.0, mb), Bins(0.0, 1.0, nb)};
    auto xs = random_values(rng, k, 0.0, 1.0);
    auto ys = random_values(rng, k, 0.0, 1.0);
    const double eps = (trial % 3 == 0) ? 0.0 : rng.uniform(0.01, 1.0);
    const double got = mi_iid(xs, ys, b, eps);
    CHECK(std::abs(got - oracle_mi_iid(xs, ys, b, eps)) <= 1e-9);
    CHECK(std::abs(got - oracle_mi_iid_entropy(xs, ys, b, eps)) <= 1e-9);
  }
}

TEST_CASE("iid MI symmetry and bounds") {
  Rng rng(77);
  BinningScheme b{Bins(0.0, 1.0, 6), Bins(0.0, 1.0, 6)};
  BinningScheme swapped{b.y, b.x};
  for (int trial = 0; trial < 20; ++trial) {
    auto xs = random_values(rng, 60, 0.0, 1.0);
    auto ys = random_values(rng, 60, 0.0, 1.0);
    const double fwd = mi_iid(xs, ys, b, 0.0);
    CHECK(fwd == mi_iid(ys, xs, swapped, 0.0));  // exact symmetry
    CHECK(fwd >= 0.0);
    const double hx = entropy(estimate_pdf(xs, b.x, 0.0));
    const double hy = entropy(estimate_pdf(ys, b.y, 0.0));
    CHECK(fwd <= std::min(hx, hy) + 1e-9);
  }
}

TEST_CASE("merging output bins never increases iid MI") {
  Rng rng(31);
  BinningScheme fine{Bins(0.0, 1.0, 6), Bins(0.0, 1.0, 8)};
  BinningScheme coarse{Bins(0.0, 1.0, 6), Bins(0.0, 1.0, 4)};  // pairs of fine bins merged
  for (int trial = 0; trial < 10; ++trial) {
    auto xs = random_values(rng, 120, 0.0, 1.0);
    auto ys = random_values(rng, 120, 0.0, 1.0);
    CHECK(mi_iid(xs, ys, coarse, 0.0) <= mi_iid(xs, ys, fine, 0.0) + 1e-12);
  }
}

TEST_CASE("markov MI: degenerate cases") {
  BinningScheme b{Bins(0.0, 4.0, 4), Bins(0.0, 4.0, 4)};
  std::vector<double> xs{0.5, 1.5, 2.5, 3.5, 0.5, 1.5, 2.5, 3.5, 0.5};
  std::vector<double> flat(xs.size(), 2.0);
  CHECK(mi_markov(xs, flat, b, 0.0) == 0.0);
  CHECK_THROWS(mi_markov({1.0, 2.0}, {1.0, 2.0}, b, 0.0));  // needs three samples
}

TEST_CASE("markov MI vanishes when consecutive pairs factorize empirically") {
  // Periods 2 and 3 are coprime: over 600 consecutive-pair tuples each of the
  // six phase combinations appears exactly 100 times, so the tuple joint is an
  // exact product and both MI terms are zero.
  const std::size_t k = 601;
  std::vector<double> xs(k), ys(k);
  for (std::size_t t = 0; t < k; ++t) {
    xs[t] = 0.5 + static_cast<double>(t % 2);        // bins 1 and 2
    ys[t] = 0.5 + static_cast<double>(t % 3);        // bins 1..3
  }
  BinningScheme b{Bins(0.0, 2.0, 2), Bins(0.0, 3.0, 3)};
  CHECK(mi_markov(xs, ys, b, 0.0) <= 1e-9);
}

TEST_CASE("markov MI matches the dense entropy-decomposition oracle") {
  // Hand-specified alternating chain first.
  {
    std::vector<double> alt(100);
    for (std::size_t t = 0; t < alt.size(); ++t) alt[t] = 0.5 + static_cast<double>(t % 2);
    BinningScheme b{Bins(0.0, 2.0, 2), Bins(0.0, 2.0, 2)};
    CHECK(std::abs(mi_markov(alt, alt, b, 0.0) - oracle_mi_markov(alt, alt, b, 0.0)) <= 1e-9);
  }
  Rng rng(910);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t k = 200;
    const int mb = rng.uniform_int(2, 5);
    const int nb = rng.uniform_int(2, 5);
    BinningScheme b{Bins(0.0, 1.0, mb), Bins(0.0, 1.0, nb)};
    auto xs = random_values(rng, k, 0.0, 1.0);
    // Correlate y with x so the estimate is nontrivial.
    std::vector<double> ys(k);
    for (std::size_t t = 0; t < k; ++t)
      ys[t] = std::min(1.0, std::max(0.0, 0.7 * xs[t] + 0.3 * rng.u01()));
    const double eps = (trial % 2 == 0) ? 0.0 : 0.0583;
    const double got = mi_markov(xs, ys, b, eps);
    CHECK(std::abs(got - oracle_mi_markov(xs, ys, b, eps)) <= 1e-9);
    CHECK(got >= 0.0);
  }
}

TEST_CASE("score_pair bundles the three estimates consistently") {
  Rng rng(123);
  BinningScheme b{Bins(0.0, 1.0, 5), Bins(0.0, 1.0, 5)};
  auto xs = random_values(rng, 80, 0.0, 1.0);
  auto ys = random_values(rng, 80, 0.0, 1.0);
  MiReport rep = score_pair(xs, ys, b, 0.0583);
  CHECK(rep.k == 80);
  CHECK(rep.iid_mi_bits == mi_iid(xs, ys, b, 0.0583));
  CHECK(rep.markov_mi_bits == mi_markov(xs, ys, b, 0.0583));
  CHECK(rep.entropy_x_bits == entropy(estimate_pdf(xs, b.x, 0.0583)));
  CHECK(rep.iid_mi_bits >= 0.0);
  CHECK(rep.markov_mi_bits >= 0.0);
}
