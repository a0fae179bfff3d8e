#pragma once

// Closed-form reference regimes for the two flattening technologies.  A
// storage device that can shift energy both ways can hold the grid load
// perfectly flat (zero leakage); a heat-type flexible load can only add
// demand, so the flat target clips from below and the excursions above
// it leak information.  These oracles compute the flat targets, the
// induced leakage, and the consecutive-pair pattern counts, both in
// closed form over distributions and empirically over sampled sequences.

#include <cstdint>
#include <string>
#include <vector>

namespace privshape {

struct DiscreteDistribution {
  std::vector<double> support;  // strictly increasing
  std::vector<double> probs;    // positive, sums to 1

  void validate() const;
  double mean() const;
  double min_value() const;
  double max_value() const;
  double entropy_bits() const;
  double prob_above(double threshold) const;  // P(X > threshold)
};

struct IdealRegime {
  DiscreteDistribution x;
  double d_th_mean = 0;        // average flexible thermal demand, kW
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
  double capacity_kwh = 0;     // 0 = unbounded store
  double initial_soc = 0.5;
  // Idealisation flags: perfect load knowledge, lossless forecast, flat
  // tariff, stationary demand, unconstrained power, continuous control,
  // ideal metering, synchronous steps.
  bool assumptions[8] = {true, true, true, true, true, true, true, true};

  // Flat grid target sustainable by the storage device: the level whose
  // surplus inflow, after charge losses, exactly covers the deficit
  // outflow grossed up by discharge losses.  Equals the mean when both
  // efficiencies are 1.
  double y_star_ess() const;
  // Mean top-up the losses require on top of the mean load.
  double l_ess() const { return y_star_ess() - x.mean(); }
  // Flat target for the add-only thermal path: mean load plus the mean
  // electrical-equivalent thermal demand.
  double y_star_th() const { return x.mean() + d_th_mean; }
};

struct IdealEssResult {
  std::vector<double> y;       // constant at the flat target
  std::vector<double> energy;  // implied store trajectory, kWh, length k+1
  bool capacity_violated = false;
};

// Flat output at the storage target plus the implied store trajectory;
// flags when a finite capacity cannot absorb the running imbalance.
IdealEssResult ideal_ess_policy(const std::vector<double>& x, const IdealRegime& regime);

// Add-only flattening: y = max(x, flat target).
std::vector<double> ideal_ftl_policy(const std::vector<double>& x, const IdealRegime& regime);

struct LeakagePrediction {
  double literal_bits = 0;  // P(X > y*) · H(X), the simple excursion formula
  double exact_bits = 0;    // exact MI of the induced (X, max(X, y*)) pair
};

// Both leakage expressions for the add-only policy, side by side.  They
// coincide exactly when no mass lies above the target and differ in
// general; callers report both rather than reconciling them.
LeakagePrediction eq8_prediction(const DiscreteDistribution& x, double y_star);

struct MarkovCounts {
  std::int64_t g1 = 0;  // current step at or below the target
  std::int64_t g2 = 0;  // current above, previous at or below
  std::int64_t g3 = 0;  // both above
  std::int64_t total() const { return g1 + g2 + g3; }
};

// Classifies steps 3..k of the sequence by their excursion pattern
// relative to the flat target; the three counts partition exactly k−2
// steps.  Throws when the sequence is shorter than 3.
MarkovCounts markov_decomposition_counts(const std::vector<double>& x,
                                         const std::vector<double>& y, double y_star);

struct PropositionReport {
  double constant_y_mi = 0;      // leakage of a constant output
  double min_random_mi = 0;      // smallest leakage over random feasible outputs
  double uniform_conditional_mi = 0;  // leakage of the uniform output channel
  bool minimal_entropy_ok = false;    // constant output is a global minimiser
  bool max_conditional_ok = false;    // uniform channel reaches zero leakage
};

// Checks the two flattening principles on a distribution: an output of a
// single value leaks nothing and no random feasible channel does better,
// and a channel whose output is uniform regardless of the input also
// leaks nothing.  Rejects single-atom distributions.
PropositionReport verify_propositions(const DiscreteDistribution& x, std::uint64_t seed = 7);

// Deterministic inverse-CDF sampling.
std::vector<double> sample_sequence(const DiscreteDistribution& dist, std::size_t k,
                                    std::uint64_t seed);

struct TheoryCheck {
  std::string name;
  double value = 0;
  double reference = 0;
  double tolerance = 0;
  bool pass = false;
};

struct TheoryReport {
  std::vector<TheoryCheck> checks;
  bool all_pass = false;
};

// Runs the full battery of closed-form and sampled-sequence checks; used
// by the command-line `theory` report and the release gate.
TheoryReport run_theory_checks(std::uint64_t seed = 7);

}  // namespace privshape
