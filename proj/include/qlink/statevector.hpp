#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace qlink {

using c64 = std::complex<double>;

enum class GateKind { RX, RY, RZ, RXX, CZ, CNOT };

bool is_parametric(GateKind kind);
int gate_arity(GateKind kind);
const char* gate_name(GateKind kind);
std::optional<GateKind> gate_from_name(std::string_view name);

// Dense complex amplitudes over the 2^n computational basis states.
// Qubit 0 is the least significant bit of the basis index.
struct StateVector {
  int n_qubits = 0;
  std::vector<c64> amplitudes;

  double norm() const;
};

inline constexpr int kMaxQubits = 24;  // memory guard, 2^24 amplitudes

// |0...0>
StateVector zero_state(int n_qubits);

// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
StateVector random_state(int n_qubits, std::uint64_t seed);

// Returns U|psi>. Angle must be present exactly for parametric gates
// (RX/RY/RZ/RXX). For CNOT, targets = {control, target}; CZ is symmetric.
StateVector apply_gate(const StateVector& state, GateKind kind,
                       std::optional<double> angle, std::span<const int> targets);

// Unchecked fast path used by the circuit runner; target1 < 0 for
// single-qubit gates.
void apply_gate_inplace(StateVector& state, GateKind kind, double angle,
                        int target0, int target1 = -1);

// <Z_q> = P(bit q = 0) - P(bit q = 1), in [-1, 1].
double expectation_z(const StateVector& state, int qubit);

// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);

c64 inner_product(const StateVector& a, const StateVector& b);

}  // namespace qlink
