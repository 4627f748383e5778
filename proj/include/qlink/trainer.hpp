#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "qlink/circuit.hpp"
#include "qlink/objective.hpp"

namespace qlink {

struct TrainConfig {
  double learning_rate = 0.1;
  int max_iterations = 1500;
  double loss_threshold = 1e-3;
  std::uint64_t seed = 0;
};

// losses[0] is the loss at the initial parameters; losses.size() ==
// stop_iteration (1-based iteration at which the threshold was first met,
// or max_iterations). final_params produced losses.back().
struct TrainTrace {
  std::vector<double> losses;
  int stop_iteration = 0;
  bool converged = false;
  ParamVector final_params;
};

// theta' = theta - lr * g
ParamVector sgd_step(const ParamVector& params, const GradientVector& grad,
                     double learning_rate);

// Full-batch gradient descent on a fixed input state. The loss is recorded
// before each update and checked strictly (<) against the threshold.
// Parameters start from init_params(circuit, config.seed) unless an explicit
// initial vector is supplied.
TrainTrace train(const CircuitSpec& circuit, const StateVector& input,
                 const TrainConfig& config,
                 const ParamVector* initial_params = nullptr);

// max_iterations / stop_iteration; 1.0 for unconverged traces by definition.
double convergence_efficiency(const TrainTrace& trace, int max_iterations);

// CSV columns: iteration (1-based), loss. A leading '#' comment line carries
// seed, config hash and artifact version.
void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace,
                     std::uint64_t seed, const std::string& config_hash);

nlohmann::json trace_to_json(const TrainTrace& trace, const TrainConfig& config,
                             const CircuitSpec& circuit);

}  // namespace qlink
