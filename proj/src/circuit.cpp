#include "qlink/circuit.hpp"

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "qlink/kernels.hpp"

namespace qlink {

const char* ansatz_name(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::VANILLA: return "VANILLA";
    case AnsatzKind::QLINK_FIXED: return "QLINK_FIXED";
    case AnsatzKind::QLINK_ADAPTIVE: return "QLINK_ADAPTIVE";
  }
  return "?";
}

std::string ansatz_label(AnsatzKind kind) {
  std::string s = ansatz_name(kind);
  for (char& c : s) c = static_cast<char>(std::tolower(c));
  return s;
}

std::optional<AnsatzKind> ansatz_from_name(std::string_view name) {
  std::string up(name);
  for (char& c : up) c = static_cast<char>(std::toupper(c));
  if (up == "VANILLA") return AnsatzKind::VANILLA;
  if (up == "QLINK_FIXED") return AnsatzKind::QLINK_FIXED;
  if (up == "QLINK_ADAPTIVE") return AnsatzKind::QLINK_ADAPTIVE;
  return std::nullopt;
}

void validate_circuit(const CircuitSpec& circuit) {
  if (circuit.n_total < 1 || circuit.n_total > kMaxQubits) {
    throw std::invalid_argument("circuit n_total out of range");
  }
  if (circuit.n_data < 1 || circuit.n_data > circuit.n_total) {
    throw std::invalid_argument("circuit n_data out of range");
  }
  std::vector<int> slot_uses(circuit.param_count, 0);
  for (const GateInstruction& inst : circuit.instructions) {
    const int arity = gate_arity(inst.gate);
    if (inst.target0 < 0 || inst.target0 >= circuit.n_total) {
      throw std::out_of_range("instruction target out of range");
    }
    if (arity == 2) {
      if (inst.target1 < 0 || inst.target1 >= circuit.n_total) {
        throw std::out_of_range("instruction target out of range");
      }
      if (inst.target1 == inst.target0) {
        throw std::out_of_range("instruction with duplicate targets");
      }
    } else if (inst.target1 >= 0) {
      throw std::invalid_argument("single-qubit instruction with two targets");
    }
    if (is_parametric(inst.gate)) {
      if (inst.binding == GateInstruction::Binding::none) {
        throw std::invalid_argument("parametric gate without angle binding");
      }
      if (inst.binding == GateInstruction::Binding::param_slot) {
        if (inst.slot < 0 || inst.slot >= circuit.param_count) {
          throw std::invalid_argument("param slot out of range");
        }
        slot_uses[inst.slot]++;
      }
    } else if (inst.binding != GateInstruction::Binding::none) {
      throw std::invalid_argument("non-parametric gate with angle binding");
    }
  }
  for (int s = 0; s < circuit.param_count; ++s) {
    if (slot_uses[s] != 1) {
      throw std::invalid_argument("param slot " + std::to_string(s) +
                                  " used " + std::to_string(slot_uses[s]) +
                                  " times; expected exactly once");
    }
  }
}

void run_circuit_inplace(const CircuitSpec& circuit, const ParamVector& params,
                         StateVector& state) {
  if (state.n_qubits != circuit.n_total) {
    throw std::invalid_argument("input state has " +
                                std::to_string(state.n_qubits) +
                                " qubits, circuit expects " +
                                std::to_string(circuit.n_total));
  }
  if (static_cast<int>(params.size()) != circuit.param_count) {
    throw std::invalid_argument("param vector length " +
                                std::to_string(params.size()) +
                                " != param_count " +
                                std::to_string(circuit.param_count));
  }
  using namespace kernels;
  c64* a = state.amplitudes.data();
  const u64 dim = state.amplitudes.size();
  const auto& ins = circuit.instructions;
  const std::size_t n = ins.size();
  std::size_t i = 0;
  while (i < n) {
    const GateInstruction& g = ins[i];
    // The ansatz layers emit RZ,RY,RX runs on one wire; apply them as a
    // single composed 2x2 to cut sweeps.
    if (g.gate == GateKind::RZ && i + 2 < n &&
        ins[i + 1].gate == GateKind::RY && ins[i + 1].target0 == g.target0 &&
        ins[i + 2].gate == GateKind::RX && ins[i + 2].target0 == g.target0) {
      auto m = matmul2(ry_matrix(ins[i + 1].resolve_angle(params)),
                       rz_matrix(g.resolve_angle(params)));
      m = matmul2(rx_matrix(ins[i + 2].resolve_angle(params)), m);
      apply_1q(a, dim, g.target0, m);
      i += 3;
      continue;
    }
    const double angle = g.resolve_angle(params);
    apply_gate_inplace(state, g.gate, angle, g.target0, g.target1);
    ++i;
  }
}

StateVector run_circuit(const CircuitSpec& circuit, const ParamVector& params,
                        const StateVector& input) {
  StateVector out = input;
  run_circuit_inplace(circuit, params, out);
  return out;
}

nlohmann::json circuit_to_json(const CircuitSpec& circuit) {
  nlohmann::json doc;
  doc["kind"] = ansatz_name(circuit.kind);
  doc["n_total"] = circuit.n_total;
  doc["n_data"] = circuit.n_data;
  doc["depth"] = circuit.depth;
  doc["param_count"] = circuit.param_count;
  nlohmann::json list = nlohmann::json::array();
  for (const GateInstruction& g : circuit.instructions) {
    nlohmann::json item;
    item["gate"] = gate_name(g.gate);
    nlohmann::json targets = nlohmann::json::array();
    targets.push_back(g.target0);
    if (g.target1 >= 0) targets.push_back(g.target1);
    item["targets"] = targets;
    switch (g.binding) {
      case GateInstruction::Binding::none: break;
      case GateInstruction::Binding::fixed_angle: item["angle"] = g.angle; break;
      case GateInstruction::Binding::param_slot: item["slot"] = g.slot; break;
    }
    list.push_back(std::move(item));
  }
  doc["instructions"] = std::move(list);
  return doc;
}

CircuitSpec circuit_from_json(const nlohmann::json& doc) {
  CircuitSpec c;
  const auto kind = ansatz_from_name(doc.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("circuit.kind: unknown value");
  c.kind = *kind;
  c.n_total = doc.at("n_total").get<int>();
  c.n_data = doc.at("n_data").get<int>();
  c.depth = doc.at("depth").get<int>();
  c.param_count = doc.at("param_count").get<int>();
  for (const auto& item : doc.at("instructions")) {
    GateInstruction g;
    const auto gate = gate_from_name(item.at("gate").get<std::string>());
    if (!gate) throw std::invalid_argument("circuit.instructions: unknown gate");
    g.gate = *gate;
    const auto& targets = item.at("targets");
    g.target0 = targets.at(0).get<int>();
    g.target1 = targets.size() > 1 ? targets.at(1).get<int>() : -1;
    if (item.contains("angle")) {
      g.binding = GateInstruction::Binding::fixed_angle;
      g.angle = item.at("angle").get<double>();
    } else if (item.contains("slot")) {
      g.binding = GateInstruction::Binding::param_slot;
      g.slot = item.at("slot").get<int>();
    }
    c.instructions.push_back(g);
  }
  validate_circuit(c);
  return c;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t circuit_hash(const CircuitSpec& circuit) {
  return fnv1a64(circuit_to_json(circuit).dump());
}

}  // namespace qlink
