#include "qlink/trainer.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qlink/ansatz.hpp"
#include "qlink/csv.hpp"
#include "qlink/version.hpp"

namespace qlink {

ParamVector sgd_step(const ParamVector& params, const GradientVector& grad,
                     double learning_rate) {
  if (params.size() != grad.size()) {
    throw std::invalid_argument("sgd_step: params length " +
                                std::to_string(params.size()) +
                                " != gradient length " +
                                std::to_string(grad.size()));
  }
  ParamVector out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out[i] = params[i] - learning_rate * grad[i];
  }
  return out;
}

TrainTrace train(const CircuitSpec& circuit, const StateVector& input,
                 const TrainConfig& config, const ParamVector* initial_params) {
  if (config.learning_rate <= 0.0) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  if (config.loss_threshold <= 0.0) {
    throw std::invalid_argument("loss_threshold must be > 0");
  }
  if (config.max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  ParamVector params =
      initial_params ? *initial_params : init_params(circuit, config.seed);
  if (static_cast<int>(params.size()) != circuit.param_count) {
    throw std::invalid_argument("initial parameter length mismatch");
  }

  TrainTrace trace;
  trace.losses.reserve(config.max_iterations);
  for (int it = 1; it <= config.max_iterations; ++it) {
    // Loss at the current parameters, recorded before any update.
    if (it == config.max_iterations) {
      const double l = loss(circuit, params, input);
      trace.losses.push_back(l);
      trace.stop_iteration = it;
      trace.converged = l < config.loss_threshold;
      break;
    }
    LossGrad lg = loss_and_gradient(circuit, params, input);
    trace.losses.push_back(lg.loss);
    if (lg.loss < config.loss_threshold) {
      trace.stop_iteration = it;
      trace.converged = true;
      break;
    }
    params = sgd_step(params, lg.grad, config.learning_rate);
  }
  trace.final_params = std::move(params);
  return trace;
}

double convergence_efficiency(const TrainTrace& trace, int max_iterations) {
  if (trace.stop_iteration < 1) {
    throw std::invalid_argument("trace has no recorded iterations");
  }
  return static_cast<double>(max_iterations) /
         static_cast<double>(trace.stop_iteration);
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace,
                     std::uint64_t seed, const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# seed=" << seed << " config_hash=" << config_hash
      << " version=" << kVersion << "\n";
  out << "iteration,loss\n";
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    out << (i + 1) << ',' << format_double(trace.losses[i]) << "\n";
  }
}

nlohmann::json trace_to_json(const TrainTrace& trace, const TrainConfig& config,
                             const CircuitSpec& circuit) {
  nlohmann::json doc;
  doc["version"] = kVersion;
  doc["config"] = {{"learning_rate", config.learning_rate},
                   {"max_iterations", config.max_iterations},
                   {"loss_threshold", config.loss_threshold},
                   {"seed", config.seed}};
  doc["circuit"] = {{"kind", ansatz_name(circuit.kind)},
                    {"n_total", circuit.n_total},
                    {"n_data", circuit.n_data},
                    {"depth", circuit.depth},
                    {"param_count", circuit.param_count},
                    {"hash", hash_hex(circuit_hash(circuit))}};
  doc["losses"] = trace.losses;
  doc["stop_iteration"] = trace.stop_iteration;
  doc["converged"] = trace.converged;
  doc["final_params"] = trace.final_params;
  return doc;
}

}  // namespace qlink
