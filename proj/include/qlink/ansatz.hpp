#pragma once

#include <cstdint>

#include "qlink/circuit.hpp"

namespace qlink {

// Layer count used by the experiments: ceil(n^2 ln n) for n total qubits.
int depth_for(int n_total);

struct AnsatzOptions {
  bool ring_entangler = false;  // add the (n-1, 0) CZ pair to each layer
  int layers_per_block = 1;     // operation layers wrapped by one collect/distribute cycle
};

// Per layer: RZ, RY, RX on every qubit (one slot each), then a CZ chain over
// neighboring pairs. param_count = 3 * n_data * depth.
CircuitSpec build_vanilla(int n_data, int depth, const AnsatzOptions& opts = {});

// Messenger-qubit residual circuit. The messenger is wire n_data, starting in
// |0> like the rest. Each block: RXX(messenger, data_i) for ascending i
// (collection), then operation layers on the data qubits, then
// CNOT(messenger -> data_i) ascending (distribution). Collection angles are
// fixed at pi/4, or trainable when adaptive; their slots follow the rotation
// slots, grouped per block.
CircuitSpec build_qlink(int n_data, int depth, bool adaptive,
                        const AnsatzOptions& opts = {});

// n_total semantics used in experiment labels: a QLINK circuit at label n has
// n - 1 data qubits plus the messenger.
CircuitSpec build_architecture(AnsatzKind kind, int n_total, int depth,
                               const AnsatzOptions& opts = {});

// i.i.d. uniform angles on [0, 2*pi), deterministic per seed.
ParamVector init_params(const CircuitSpec& circuit, std::uint64_t seed);

}  // namespace qlink
