#include "qlink/analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "qlink/ansatz.hpp"
#include "qlink/objective.hpp"
#include "qlink/rng.hpp"

namespace qlink {

namespace {

// Run fn(first, last) over [0, total) split across n_threads. Each chunk
// writes to disjoint preallocated slots, so the result is identical to the
// serial order.
void parallel_chunks(int total, int n_threads,
                     const std::function<void(int, int)>& fn) {
  n_threads = std::max(1, std::min(n_threads, total));
  if (n_threads == 1) {
    fn(0, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  const int chunk = (total + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int first = t * chunk;
    const int last = std::min(total, first + chunk);
    if (first >= last) break;
    pool.emplace_back(fn, first, last);
  }
  for (auto& th : pool) th.join();
}

ParamVector uniform_params(int count, Rng& rng) {
  ParamVector p(count);
  for (double& v : p) v = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return p;
}

using CMat = Eigen::MatrixXcd;

// Reduced density matrix of the data qubits (messenger = highest wire).
CMat data_density_matrix(const StateVector& state, int n_data) {
  const std::size_t d = std::size_t{1} << n_data;
  CMat rho = CMat::Zero(d, d);
  const std::size_t env = state.amplitudes.size() / d;
  for (std::size_t m = 0; m < env; ++m) {
    const c64* block = state.amplitudes.data() + m * d;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        rho(i, j) += block[i] * std::conj(block[j]);
      }
    }
  }
  return rho;
}

// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2 for density matrices.
double mixed_state_fidelity(const CMat& a, const CMat& b) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMat root = es.eigenvectors() * ev.asDiagonal() *
                    es.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<CMat> es2(root * b * root);
  const double tr = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return tr * tr;
}

int bin_index(double fidelity, int n_bins) {
  int idx = static_cast<int>(fidelity * n_bins);
  if (idx < 0) idx = 0;
  if (idx >= n_bins) idx = n_bins - 1;  // F == 1 lands in the last bin
  return idx;
}

}  // namespace

double haar_pdf(double fidelity, long long hilbert_dim) {
  if (hilbert_dim < 2) throw std::invalid_argument("hilbert_dim must be >= 2");
  if (fidelity < 0.0 || fidelity > 1.0) {
    throw std::invalid_argument("fidelity must be in [0, 1]");
  }
  const double n = static_cast<double>(hilbert_dim);
  return (n - 1.0) * std::pow(1.0 - fidelity, n - 2.0);
}

std::vector<double> haar_bin_masses(int n_bins, long long hilbert_dim) {
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  if (hilbert_dim < 2) throw std::invalid_argument("hilbert_dim must be >= 2");
  const double n = static_cast<double>(hilbert_dim);
  std::vector<double> q(n_bins);
  for (int i = 0; i < n_bins; ++i) {
    const double lo = static_cast<double>(i) / n_bins;
    const double hi = static_cast<double>(i + 1) / n_bins;
    q[i] = std::pow(1.0 - lo, n - 1.0) - std::pow(1.0 - hi, n - 1.0);
  }
  return q;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("histogram bin counts differ: " +
                                std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc;
}

ExpressibilityEstimate estimate_expressibility(const CircuitSpec& circuit,
                                               int n_samples, int n_bins,
                                               std::uint64_t seed,
                                               bool reduced_data_state,
                                               int n_threads) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  const int fid_qubits = reduced_data_state ? circuit.n_data : circuit.n_total;
  const long long dim = 1LL << fid_qubits;
  const StateVector start = zero_state(circuit.n_total);

  std::vector<double> fids(n_samples);
  parallel_chunks(n_samples, n_threads, [&](int first, int last) {
    for (int s = first; s < last; ++s) {
      Rng rng(mix_seed(seed, {static_cast<std::uint64_t>(s)}));
      const ParamVector pa = uniform_params(circuit.param_count, rng);
      const ParamVector pb = uniform_params(circuit.param_count, rng);
      const StateVector sa = run_circuit(circuit, pa, start);
      const StateVector sb = run_circuit(circuit, pb, start);
      if (reduced_data_state) {
        fids[s] = mixed_state_fidelity(data_density_matrix(sa, circuit.n_data),
                                       data_density_matrix(sb, circuit.n_data));
      } else {
        fids[s] = fidelity(sa, sb);
      }
    }
  });

  std::vector<double> p(n_bins, 0.0);
  for (double f : fids) p[bin_index(f, n_bins)] += 1.0;
  for (double& v : p) v /= n_samples;

  ExpressibilityEstimate est;
  est.kl_divergence = kl_divergence(p, haar_bin_masses(n_bins, dim));
  est.n_bins = n_bins;
  est.n_samples = n_samples;
  est.hilbert_dim = dim;
  return est;
}

std::vector<double> haar_fidelity_histogram(int n_qubits, int n_pairs,
                                            int n_bins, std::uint64_t seed) {
  std::vector<double> p(n_bins, 0.0);
  for (int s = 0; s < n_pairs; ++s) {
    const StateVector a =
        random_state(n_qubits, mix_seed(seed, {2 * std::uint64_t(s)}));
    const StateVector b =
        random_state(n_qubits, mix_seed(seed, {2 * std::uint64_t(s) + 1}));
    p[bin_index(fidelity(a, b), n_bins)] += 1.0;
  }
  for (double& v : p) v /= n_pairs;
  return p;
}

VarianceReport gradient_variance(const CircuitSpec& circuit, int n_samples,
                                 std::uint64_t seed, int n_threads) {
  if (n_samples < 2) throw std::invalid_argument("n_samples must be >= 2");
  VarianceReport report;
  report.n_total = circuit.n_total;
  report.architecture = circuit.kind;
  report.n_samples = n_samples;
  if (circuit.param_count == 0) {
    report.variance = 0.0;
    report.parameter_scope = "degenerate (no trainable parameters)";
    return report;
  }
  report.parameter_scope = "theta[0] (layer 1, qubit 0, RZ)";

  std::vector<double> samples(n_samples);
  parallel_chunks(n_samples, n_threads, [&](int first, int last) {
    for (int s = first; s < last; ++s) {
      const std::uint64_t s64 = static_cast<std::uint64_t>(s);
      Rng rng(mix_seed(seed, {s64, 0}));
      const ParamVector params = uniform_params(circuit.param_count, rng);
      const StateVector input =
          random_state(circuit.n_total, mix_seed(seed, {s64, 1}));
      samples[s] = gradient(circuit, params, input)[0];
    }
  });

  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n_samples;
  double acc = 0.0;
  for (double v : samples) acc += (v - mean) * (v - mean);
  report.variance = acc / (n_samples - 1);
  return report;
}

LandscapeGrid loss_landscape(const CircuitSpec& circuit,
                             const ParamVector& trained,
                             const StateVector& input, int grid_points,
                             double range_limit, std::uint64_t seed,
                             int n_threads) {
  if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
  if (range_limit <= 0.0) throw std::invalid_argument("range_limit must be > 0");
  if (static_cast<int>(trained.size()) != circuit.param_count) {
    throw std::invalid_argument("trained parameter length mismatch");
  }
  const int P = circuit.param_count;
  Rng rng(seed);
  ParamVector d1(P), d2(P);
  for (double& v : d1) v = rng.normal();
  for (double& v : d2) v = rng.normal();
  auto normalize = [](ParamVector& d) {
    double sq = 0.0;
    for (double v : d) sq += v * v;
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (double& v : d) v *= inv;
    }
  };
  normalize(d1);
  normalize(d2);

  LandscapeGrid grid;
  grid.directions_seed = seed;
  grid.alpha_axis.resize(grid_points);
  grid.beta_axis.resize(grid_points);
  for (int k = 0; k < grid_points; ++k) {
    // Endpoints land on +-range_limit exactly; odd grids hit 0 exactly.
    const double t = 2.0 * k / (grid_points - 1) - 1.0;
    grid.alpha_axis[k] = range_limit * t;
    grid.beta_axis[k] = range_limit * t;
  }
  grid.center_loss = loss(circuit, trained, input);
  grid.losses.assign(static_cast<std::size_t>(grid_points) * grid_points, 0.0);

  parallel_chunks(grid_points, n_threads, [&](int first, int last) {
    ParamVector theta(P);
    for (int ia = first; ia < last; ++ia) {
      const double alpha = grid.alpha_axis[ia];
      for (int ib = 0; ib < grid_points; ++ib) {
        const double beta = grid.beta_axis[ib];
        for (int j = 0; j < P; ++j) {
          theta[j] = trained[j] + alpha * d1[j] + beta * d2[j];
        }
        grid.losses[static_cast<std::size_t>(ia) * grid_points + ib] =
            loss(circuit, theta, input);
      }
    }
  });
  return grid;
}

}  // namespace qlink
