#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qlink/statevector.hpp"

namespace qlink {

enum class AnsatzKind { VANILLA, QLINK_FIXED, QLINK_ADAPTIVE };

const char* ansatz_name(AnsatzKind kind);         // "VANILLA", ...
std::string ansatz_label(AnsatzKind kind);        // "vanilla", ... (file names)
std::optional<AnsatzKind> ansatz_from_name(std::string_view name);

// One gate with its angle binding: a trainable parameter slot, a fixed
// constant, or none (CZ/CNOT). For CNOT, target0 is the control.
struct GateInstruction {
  enum class Binding : std::uint8_t { none, fixed_angle, param_slot };

  GateKind gate = GateKind::RZ;
  int target0 = 0;
  int target1 = -1;  // < 0 for single-qubit gates
  Binding binding = Binding::none;
  double angle = 0.0;  // valid when binding == fixed_angle
  int slot = -1;       // valid when binding == param_slot

  double resolve_angle(std::span<const double> params) const {
    return binding == Binding::param_slot ? params[slot] : angle;
  }
};

using ParamVector = std::vector<double>;

// Ordered gate program. Param slots cover 0..param_count-1, each exactly once.
struct CircuitSpec {
  AnsatzKind kind = AnsatzKind::VANILLA;
  int n_total = 0;
  int n_data = 0;
  int depth = 0;
  int param_count = 0;
  std::vector<GateInstruction> instructions;
};

// Structural checks: target ranges, binding consistency, exact slot coverage.
void validate_circuit(const CircuitSpec& circuit);

StateVector run_circuit(const CircuitSpec& circuit, const ParamVector& params,
                        const StateVector& input);
void run_circuit_inplace(const CircuitSpec& circuit, const ParamVector& params,
                         StateVector& state);

nlohmann::json circuit_to_json(const CircuitSpec& circuit);
CircuitSpec circuit_from_json(const nlohmann::json& doc);

// FNV-1a over the canonical serialization; stable across runs and platforms.
std::uint64_t circuit_hash(const CircuitSpec& circuit);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qlink
