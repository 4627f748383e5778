#pragma once

#include "qlink/circuit.hpp"
#include "qlink/statevector.hpp"

namespace qlink {

using GradientVector = std::vector<double>;

// Ground-state preparation cost 1 - (1/n_data) * sum_i <Z_i>, in [0, 2].
// Only the data qubits enter the average.
double loss_from_state(const StateVector& state, int n_data);
double loss(const CircuitSpec& circuit, const ParamVector& params,
            const StateVector& input);

// Exact dL/dtheta for every trainable slot via an adjoint reverse sweep:
// one forward pass, then two statevectors walked backward through the
// instruction list. O(P + G) state operations.
GradientVector gradient(const CircuitSpec& circuit, const ParamVector& params,
                        const StateVector& input);

struct LossGrad {
  double loss = 0.0;
  GradientVector grad;
};

// Shares the forward pass between the loss and the adjoint sweep.
LossGrad loss_and_gradient(const CircuitSpec& circuit,
                           const ParamVector& params,
                           const StateVector& input);

// Central differences (L(t+s) - L(t-s)) / 2s. Test oracle.
GradientVector finite_diff_gradient(const CircuitSpec& circuit,
                                    const ParamVector& params,
                                    const StateVector& input, double step);

// (L(t + pi/2) - L(t - pi/2)) / 2 per slot; exact for this gate set
// (all generators are involutory). Test oracle.
GradientVector parameter_shift_gradient(const CircuitSpec& circuit,
                                        const ParamVector& params,
                                        const StateVector& input);

}  // namespace qlink
