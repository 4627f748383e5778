#include "qlink/objective.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qlink/kernels.hpp"

namespace qlink {

using kernels::c64;
using kernels::u64;

double loss_from_state(const StateVector& state, int n_data) {
  if (n_data < 1 || n_data > state.n_qubits) {
    throw std::invalid_argument("n_data out of range for state");
  }
  const u64 dmask = (u64{1} << n_data) - 1;
  const c64* a = state.amplitudes.data();
  const u64 dim = state.amplitudes.size();
  double zsum = 0.0;
  for (u64 i = 0; i < dim; ++i) {
    const int w = n_data - 2 * std::popcount(i & dmask);  // sum of Z signs
    zsum += w * std::norm(a[i]);
  }
  return 1.0 - zsum / n_data;
}

double loss(const CircuitSpec& circuit, const ParamVector& params,
            const StateVector& input) {
  StateVector out = run_circuit(circuit, params, input);
  return loss_from_state(out, circuit.n_data);
}

namespace {

// Fused backward step for one parametric gate: accumulates <bra|G|ket>
// (G = the gate generator, states taken *after* the gate), then applies the
// inverse gate to ket and bra in the same sweep.
double backstep_rz(c64* ket, c64* bra, u64 dim, int q, double theta) {
  const c64 q0{std::cos(0.5 * theta), std::sin(0.5 * theta)};  // conj(p0)
  const c64 q1 = std::conj(q0);
  const u64 mask = u64{1} << q;
  const u64 lo = mask - 1, hi = ~lo;
  const u64 pairs = dim >> 1;
  double ov_im = 0.0;
  for (u64 k = 0; k < pairs; ++k) {
    const u64 i0 = kernels::insert_zero(k, lo, hi);
    const u64 i1 = i0 | mask;
    const c64 d = kernels::cdot(bra[i0], ket[i0]) - kernels::cdot(bra[i1], ket[i1]);
    ov_im += d.imag();
    ket[i0] = kernels::cmul(q0, ket[i0]);
    ket[i1] = kernels::cmul(q1, ket[i1]);
    bra[i0] = kernels::cmul(q0, bra[i0]);
    bra[i1] = kernels::cmul(q1, bra[i1]);
  }
  return ov_im;
}

double backstep_1q(c64* ket, c64* bra, u64 dim, int q,
                   const std::array<c64, 4>& minv, GateKind kind) {
  const u64 mask = u64{1} << q;
  const u64 lo = mask - 1, hi = ~lo;
  const u64 pairs = dim >> 1;
  double ov_im = 0.0;
  for (u64 k = 0; k < pairs; ++k) {
    const u64 i0 = kernels::insert_zero(k, lo, hi);
    const u64 i1 = i0 | mask;
    const c64 k0 = ket[i0], k1 = ket[i1];
    const c64 b0 = bra[i0], b1 = bra[i1];
    if (kind == GateKind::RX) {
      // <bra|X|ket>
      ov_im += (kernels::cdot(b0, k1) + kernels::cdot(b1, k0)).imag();
    } else {
      // <bra|Y|ket> = i * (conj(b1) k0 - conj(b0) k1)
      ov_im += (kernels::cdot(b1, k0) - kernels::cdot(b0, k1)).real();
    }
    ket[i0] = kernels::cmul(minv[0], k0) + kernels::cmul(minv[1], k1);
    ket[i1] = kernels::cmul(minv[2], k0) + kernels::cmul(minv[3], k1);
    bra[i0] = kernels::cmul(minv[0], b0) + kernels::cmul(minv[1], b1);
    bra[i1] = kernels::cmul(minv[2], b0) + kernels::cmul(minv[3], b1);
  }
  return ov_im;
}

double backstep_rxx(c64* ket, c64* bra, u64 dim, int qa, int qb, double theta,
                    bool want_overlap) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  // inverse rotation: angle -theta => cos same, sin negated
  const u64 flip = (u64{1} << qa) | (u64{1} << qb);
  const u64 mask = u64{1} << qa;
  const u64 lo = mask - 1, hi = ~lo;
  const u64 pairs = dim >> 1;
  double ov_im = 0.0;
  for (u64 k = 0; k < pairs; ++k) {
    const u64 i0 = kernels::insert_zero(k, lo, hi);
    const u64 i1 = i0 ^ flip;
    const c64 k0 = ket[i0], k1 = ket[i1];
    const c64 b0 = bra[i0], b1 = bra[i1];
    if (want_overlap) {
      // <bra|X x X|ket>
      ov_im += (kernels::cdot(b0, k1) + kernels::cdot(b1, k0)).imag();
    }
    ket[i0] = {c * k0.real() - s * k1.imag(), c * k0.imag() + s * k1.real()};
    ket[i1] = {c * k1.real() - s * k0.imag(), c * k1.imag() + s * k0.real()};
    bra[i0] = {c * b0.real() - s * b1.imag(), c * b0.imag() + s * b1.real()};
    bra[i1] = {c * b1.real() - s * b0.imag(), c * b1.imag() + s * b0.real()};
  }
  return ov_im;
}

void undo_dual(c64* ket, c64* bra, u64 dim, const GateInstruction& g) {
  // CZ and CNOT are self-inverse; apply to both arrays in one sweep.
  if (g.gate == GateKind::CZ) {
    const int qmin = std::min(g.target0, g.target1);
    const int qmax = std::max(g.target0, g.target1);
    const u64 lo = (u64{1} << qmin) - 1;
    const u64 mid = ((u64{1} << (qmax - 1)) - 1) ^ lo;
    const u64 hi = ~(lo | mid);
    const u64 both = (u64{1} << qmin) | (u64{1} << qmax);
    const u64 quads = dim >> 2;
    for (u64 k = 0; k < quads; ++k) {
      const u64 i = ((k & hi) << 2) | ((k & mid) << 1) | (k & lo) | both;
      ket[i] = -ket[i];
      bra[i] = -bra[i];
    }
  } else {
    const int control = g.target0, target = g.target1;
    const int qmin = std::min(control, target), qmax = std::max(control, target);
    const u64 mc = u64{1} << control, mt = u64{1} << target;
    const u64 lo = (u64{1} << qmin) - 1;
    const u64 mid = ((u64{1} << (qmax - 1)) - 1) ^ lo;
    const u64 hi = ~(lo | mid);
    const u64 quads = dim >> 2;
    for (u64 k = 0; k < quads; ++k) {
      const u64 i = ((k & hi) << 2) | ((k & mid) << 1) | (k & lo) | mc;
      std::swap(ket[i], ket[i | mt]);
      std::swap(bra[i], bra[i | mt]);
    }
  }
}

GradientVector adjoint_from_forward(const CircuitSpec& circuit,
                                    const ParamVector& params,
                                    StateVector& ket) {
  // ket enters as the forward-evolved state; bra = O|ket> with
  // O = -(1/n_data) sum Z_i, so dL/dtheta_j = Im <bra_j|G_j|ket_j>.
  GradientVector grad(circuit.param_count, 0.0);
  StateVector bra = ket;
  kernels::apply_mean_z_observable(bra.amplitudes.data(),
                                   bra.amplitudes.size(), circuit.n_data);
  c64* kp = ket.amplitudes.data();
  c64* bp = bra.amplitudes.data();
  const u64 dim = ket.amplitudes.size();

  for (auto it = circuit.instructions.rbegin();
       it != circuit.instructions.rend(); ++it) {
    const GateInstruction& g = *it;
    const bool trainable = g.binding == GateInstruction::Binding::param_slot;
    const double theta = g.resolve_angle(params);
    double ov = 0.0;
    switch (g.gate) {
      case GateKind::RZ:
        ov = backstep_rz(kp, bp, dim, g.target0, theta);
        break;
      case GateKind::RX:
        ov = backstep_1q(kp, bp, dim, g.target0, kernels::rx_matrix(-theta),
                         GateKind::RX);
        break;
      case GateKind::RY:
        ov = backstep_1q(kp, bp, dim, g.target0, kernels::ry_matrix(-theta),
                         GateKind::RY);
        break;
      case GateKind::RXX:
        ov = backstep_rxx(kp, bp, dim, g.target0, g.target1, theta, trainable);
        break;
      case GateKind::CZ:
      case GateKind::CNOT:
        undo_dual(kp, bp, dim, g);
        break;
    }
    if (trainable) grad[g.slot] = ov;
  }
  return grad;
}

}  // namespace

GradientVector gradient(const CircuitSpec& circuit, const ParamVector& params,
                        const StateVector& input) {
  StateVector ket = run_circuit(circuit, params, input);
  return adjoint_from_forward(circuit, params, ket);
}

LossGrad loss_and_gradient(const CircuitSpec& circuit,
                           const ParamVector& params,
                           const StateVector& input) {
  StateVector ket = run_circuit(circuit, params, input);
  LossGrad out;
  out.loss = loss_from_state(ket, circuit.n_data);
  out.grad = adjoint_from_forward(circuit, params, ket);
  return out;
}

GradientVector finite_diff_gradient(const CircuitSpec& circuit,
                                    const ParamVector& params,
                                    const StateVector& input, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite difference step must be > 0");
  GradientVector grad(circuit.param_count, 0.0);
  ParamVector shifted = params;
  for (int j = 0; j < circuit.param_count; ++j) {
    const double original = shifted[j];
    shifted[j] = original + step;
    const double plus = loss(circuit, shifted, input);
    shifted[j] = original - step;
    const double minus = loss(circuit, shifted, input);
    shifted[j] = original;
    grad[j] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

GradientVector parameter_shift_gradient(const CircuitSpec& circuit,
                                        const ParamVector& params,
                                        const StateVector& input) {
  constexpr double shift = std::numbers::pi / 2.0;
  GradientVector grad(circuit.param_count, 0.0);
  ParamVector shifted = params;
  for (int j = 0; j < circuit.param_count; ++j) {
    const double original = shifted[j];
    shifted[j] = original + shift;
    const double plus = loss(circuit, shifted, input);
    shifted[j] = original - shift;
    const double minus = loss(circuit, shifted, input);
    shifted[j] = original;
    grad[j] = 0.5 * (plus - minus);
  }
  return grad;
}

}  // namespace qlink
