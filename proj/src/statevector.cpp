#include "qlink/statevector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qlink/kernels.hpp"
#include "qlink/rng.hpp"

namespace qlink {

bool is_parametric(GateKind kind) {
  switch (kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::RXX:
      return true;
    case GateKind::CZ:
    case GateKind::CNOT:
      return false;
  }
  return false;
}

int gate_arity(GateKind kind) {
  switch (kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      return 1;
    case GateKind::RXX:
    case GateKind::CZ:
    case GateKind::CNOT:
      return 2;
  }
  return 0;
}

const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::RXX: return "RXX";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
  }
  return "?";
}

std::optional<GateKind> gate_from_name(std::string_view name) {
  if (name == "RX") return GateKind::RX;
  if (name == "RY") return GateKind::RY;
  if (name == "RZ") return GateKind::RZ;
  if (name == "RXX") return GateKind::RXX;
  if (name == "CZ") return GateKind::CZ;
  if (name == "CNOT") return GateKind::CNOT;
  return std::nullopt;
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const c64& a : amplitudes) acc += std::norm(a);
  return std::sqrt(acc);
}

static void check_size(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("n_qubits must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(n_qubits));
  }
}

StateVector zero_state(int n_qubits) {
  check_size(n_qubits);
  StateVector sv;
  sv.n_qubits = n_qubits;
  sv.amplitudes.assign(std::size_t{1} << n_qubits, c64{0.0, 0.0});
  sv.amplitudes[0] = c64{1.0, 0.0};
  return sv;
}

StateVector random_state(int n_qubits, std::uint64_t seed) {
  check_size(n_qubits);
  StateVector sv;
  sv.n_qubits = n_qubits;
  sv.amplitudes.resize(std::size_t{1} << n_qubits);
  Rng rng(seed);
  double sq = 0.0;
  for (c64& a : sv.amplitudes) {
    const double re = rng.normal();
    const double im = rng.normal();
    a = c64{re, im};
    sq += re * re + im * im;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (c64& a : sv.amplitudes) a *= inv;
  return sv;
}

void apply_gate_inplace(StateVector& state, GateKind kind, double angle,
                        int target0, int target1) {
  using namespace kernels;
  c64* a = state.amplitudes.data();
  const u64 dim = state.amplitudes.size();
  switch (kind) {
    case GateKind::RX: apply_1q(a, dim, target0, rx_matrix(angle)); break;
    case GateKind::RY: apply_1q(a, dim, target0, ry_matrix(angle)); break;
    case GateKind::RZ: apply_rz(a, dim, target0, angle); break;
    case GateKind::RXX: apply_rxx(a, dim, target0, target1, angle); break;
    case GateKind::CZ: apply_cz(a, dim, target0, target1); break;
    case GateKind::CNOT: apply_cnot(a, dim, target0, target1); break;
  }
}

StateVector apply_gate(const StateVector& state, GateKind kind,
                       std::optional<double> angle,
                       std::span<const int> targets) {
  const int arity = gate_arity(kind);
  if (static_cast<int>(targets.size()) != arity) {
    throw std::out_of_range(std::string(gate_name(kind)) + " expects " +
                            std::to_string(arity) + " target(s), got " +
                            std::to_string(targets.size()));
  }
  for (int t : targets) {
    if (t < 0 || t >= state.n_qubits) {
      throw std::out_of_range("target qubit " + std::to_string(t) +
                              " out of range for " +
                              std::to_string(state.n_qubits) + " qubits");
    }
  }
  if (arity == 2 && targets[0] == targets[1]) {
    throw std::out_of_range("duplicate target qubit " +
                            std::to_string(targets[0]));
  }
  if (is_parametric(kind) != angle.has_value()) {
    throw std::invalid_argument(std::string(gate_name(kind)) +
                                (angle ? " takes no angle" : " requires an angle"));
  }
  StateVector out = state;
  apply_gate_inplace(out, kind, angle.value_or(0.0), targets[0],
                     arity == 2 ? targets[1] : -1);
  return out;
}

double expectation_z(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits) {
    throw std::out_of_range("qubit " + std::to_string(qubit) +
                            " out of range for " +
                            std::to_string(state.n_qubits) + " qubits");
  }
  return kernels::expectation_z(state.amplitudes.data(),
                                state.amplitudes.size(), qubit);
}

c64 inner_product(const StateVector& a, const StateVector& b) {
  if (a.n_qubits != b.n_qubits) {
    throw std::invalid_argument("state dimension mismatch: " +
                                std::to_string(a.n_qubits) + " vs " +
                                std::to_string(b.n_qubits) + " qubits");
  }
  c64 acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    acc += kernels::cdot(a.amplitudes[i], b.amplitudes[i]);
  }
  return acc;
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner_product(a, b));
}

}  // namespace qlink
