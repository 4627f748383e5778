#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qlink/circuit.hpp"
#include "qlink/statevector.hpp"

namespace qlink {

// Fidelity density of independent Haar-random pure states in dimension N:
// (N-1) * (1-F)^(N-2).
double haar_pdf(double fidelity, long long hilbert_dim);

// Closed-form integral of haar_pdf over n_bins equal-width bins of [0, 1]:
// (1-F_lo)^(N-1) - (1-F_hi)^(N-1). Strictly positive except possibly the
// last bins at large N where the mass underflows.
std::vector<double> haar_bin_masses(int n_bins, long long hilbert_dim);

// sum_i p_i ln(p_i / q_i) over bins with p_i > 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct ExpressibilityEstimate {
  double kl_divergence = 0.0;
  int n_bins = 0;
  int n_samples = 0;
  long long hilbert_dim = 0;
};

inline constexpr int kExpressibilitySamples = 5000;
inline constexpr int kExpressibilityBins = 75;

// Samples n_samples pairs of uniform-[0, 2pi) parameter vectors, runs the
// circuit from |0...0> for each, and compares the fidelity histogram with
// the integrated Haar baseline. With reduced_data_state the messenger wire
// is traced out first and Uhlmann fidelities over the data qubits are used
// (N = 2^n_data instead of 2^n_total).
ExpressibilityEstimate estimate_expressibility(const CircuitSpec& circuit,
                                               int n_samples, int n_bins,
                                               std::uint64_t seed,
                                               bool reduced_data_state = false,
                                               int n_threads = 1);

// Fidelity histogram of n_pairs independent Haar state pairs; self-test
// input for the estimator above.
std::vector<double> haar_fidelity_histogram(int n_qubits, int n_pairs,
                                            int n_bins, std::uint64_t seed);

struct VarianceReport {
  int n_total = 0;
  AnsatzKind architecture = AnsatzKind::VANILLA;
  double variance = 0.0;
  int n_samples = 0;
  std::string parameter_scope;
};

inline constexpr int kVarianceSamples = 200;

// Sample variance (n-1 denominator) of dL/dtheta_0 -- the first rotation
// parameter of the first layer -- over n_samples independent uniform
// initializations, each paired with a fresh Haar-random input state.
VarianceReport gradient_variance(const CircuitSpec& circuit, int n_samples,
                                 std::uint64_t seed, int n_threads = 1);

struct LandscapeGrid {
  std::vector<double> alpha_axis;
  std::vector<double> beta_axis;
  std::vector<double> losses;  // row-major: losses[ia * grid + ib]
  double center_loss = 0.0;
  std::uint64_t directions_seed = 0;

  double at(int ia, int ib) const {
    return losses[static_cast<std::size_t>(ia) * beta_axis.size() + ib];
  }
};

// Loss over theta = trained + alpha*d1 + beta*d2 for two independent
// Gaussian directions normalized to unit L2 norm, on a grid_points^2 grid
// spanning [-range_limit, range_limit] exactly on both axes.
LandscapeGrid loss_landscape(const CircuitSpec& circuit,
                             const ParamVector& trained,
                             const StateVector& input, int grid_points = 200,
                             double range_limit = 3.0, std::uint64_t seed = 0,
                             int n_threads = 1);

}  // namespace qlink
