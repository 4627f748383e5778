#include "qlink/ansatz.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qlink/rng.hpp"

namespace qlink {

int depth_for(int n_total) {
  if (n_total < 2) throw std::invalid_argument("depth_for requires n_total >= 2");
  const double n = static_cast<double>(n_total);
  return static_cast<int>(std::ceil(n * n * std::log(n)));
}

namespace {

void append_rotation_layer(CircuitSpec& c, int n_data, int& slot) {
  for (int q = 0; q < n_data; ++q) {
    for (GateKind k : {GateKind::RZ, GateKind::RY, GateKind::RX}) {
      GateInstruction g;
      g.gate = k;
      g.target0 = q;
      g.binding = GateInstruction::Binding::param_slot;
      g.slot = slot++;
      c.instructions.push_back(g);
    }
  }
}

void append_cz_chain(CircuitSpec& c, int n_data, const AnsatzOptions& opts) {
  for (int q = 0; q + 1 < n_data; ++q) {
    GateInstruction g;
    g.gate = GateKind::CZ;
    g.target0 = q;
    g.target1 = q + 1;
    c.instructions.push_back(g);
  }
  if (opts.ring_entangler && n_data > 2) {
    GateInstruction g;
    g.gate = GateKind::CZ;
    g.target0 = n_data - 1;
    g.target1 = 0;
    c.instructions.push_back(g);
  }
}

}  // namespace

CircuitSpec build_vanilla(int n_data, int depth, const AnsatzOptions& opts) {
  if (n_data < 2) throw std::invalid_argument("build_vanilla requires n_data >= 2");
  if (depth < 1) throw std::invalid_argument("build_vanilla requires depth >= 1");
  CircuitSpec c;
  c.kind = AnsatzKind::VANILLA;
  c.n_total = n_data;
  c.n_data = n_data;
  c.depth = depth;
  c.param_count = 3 * n_data * depth;
  int slot = 0;
  for (int d = 0; d < depth; ++d) {
    append_rotation_layer(c, n_data, slot);
    append_cz_chain(c, n_data, opts);
  }
  validate_circuit(c);
  return c;
}

CircuitSpec build_qlink(int n_data, int depth, bool adaptive,
                        const AnsatzOptions& opts) {
  if (n_data < 2) throw std::invalid_argument("build_qlink requires n_data >= 2");
  if (depth < 1) throw std::invalid_argument("build_qlink requires depth >= 1");
  if (opts.layers_per_block < 1) {
    throw std::invalid_argument("layers_per_block must be >= 1");
  }
  CircuitSpec c;
  c.kind = adaptive ? AnsatzKind::QLINK_ADAPTIVE : AnsatzKind::QLINK_FIXED;
  c.n_total = n_data + 1;
  c.n_data = n_data;
  c.depth = depth;
  const int messenger = n_data;
  const int rotation_slots = 3 * n_data * depth;
  const int blocks = (depth + opts.layers_per_block - 1) / opts.layers_per_block;
  c.param_count = rotation_slots + (adaptive ? n_data * blocks : 0);

  int rot_slot = 0;
  int coll_slot = rotation_slots;  // collection slots follow all rotation slots
  int layers_done = 0;
  while (layers_done < depth) {
    for (int q = 0; q < n_data; ++q) {
      GateInstruction g;
      g.gate = GateKind::RXX;
      g.target0 = q;
      g.target1 = messenger;
      if (adaptive) {
        g.binding = GateInstruction::Binding::param_slot;
        g.slot = coll_slot++;
      } else {
        g.binding = GateInstruction::Binding::fixed_angle;
        g.angle = std::numbers::pi / 4.0;
      }
      c.instructions.push_back(g);
    }
    const int block_layers =
        std::min(opts.layers_per_block, depth - layers_done);
    for (int l = 0; l < block_layers; ++l) {
      append_rotation_layer(c, n_data, rot_slot);
      append_cz_chain(c, n_data, opts);
    }
    layers_done += block_layers;
    for (int q = 0; q < n_data; ++q) {
      GateInstruction g;
      g.gate = GateKind::CNOT;
      g.target0 = messenger;  // control
      g.target1 = q;
      c.instructions.push_back(g);
    }
  }
  validate_circuit(c);
  return c;
}

CircuitSpec build_architecture(AnsatzKind kind, int n_total, int depth,
                               const AnsatzOptions& opts) {
  switch (kind) {
    case AnsatzKind::VANILLA:
      return build_vanilla(n_total, depth, opts);
    case AnsatzKind::QLINK_FIXED:
      return build_qlink(n_total - 1, depth, false, opts);
    case AnsatzKind::QLINK_ADAPTIVE:
      return build_qlink(n_total - 1, depth, true, opts);
  }
  throw std::invalid_argument("unknown architecture");
}

ParamVector init_params(const CircuitSpec& circuit, std::uint64_t seed) {
  Rng rng(seed);
  ParamVector params(circuit.param_count);
  for (double& p : params) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return params;
}

}  // namespace qlink
