#include "qctol/golden.hpp"

#include <memory>

namespace qctol {

namespace {

using SpecPtr = std::shared_ptr<const BiEntanglingGateSpec>;

Matrix ket_projector(int k) {
  Matrix m = Matrix::Zero(4, 4);
  m(k, k) = 1.0;
  return m;
}

std::vector<Matrix> computational_states() { return {ket_projector(0), ket_projector(1), ket_projector(2), ket_projector(3)}; }

SpecPtr bell_swap_spec() {
  return std::make_shared<const BiEntanglingGateSpec>(std::array<double, 3>{0.0, 0.0, 1.0}, std::vector<KrausPair>{},
                                                      std::vector<KrausPair>{}, bell_measurement(computational_states()),
                                                      std::nullopt, "bell_measure");
}

SpecPtr computational_eb_spec() {
  std::vector<Matrix> povm = computational_states();
  std::vector<Matrix> prep(4, ket_projector(0));
  return std::make_shared<const BiEntanglingGateSpec>(std::array<double, 3>{0.0, 0.0, 1.0}, std::vector<KrausPair>{},
                                                      std::vector<KrausPair>{}, MeasurePrepare(povm, prep),
                                                      std::nullopt, "z_measure_reset");
}

SpecPtr mixed_spec() {
  const Matrix h = gates::hadamard();
  const Matrix hi = kron(h, identity(2));
  std::vector<Matrix> prep;
  for (int k = 0; k < 4; ++k) prep.push_back(hi * ket_projector(k) * hi.adjoint());
  return std::make_shared<const BiEntanglingGateSpec>(
      std::array<double, 3>{0.5, 0.25, 0.25}, product_kraus_pairs(unitary(h), dephase()),
      std::vector<KrausPair>{{identity(2), pauli('X')}}, MeasurePrepare(computational_states(), prep), std::nullopt,
      "mixed");
}

SpecPtr degenerate_spec() {
  std::vector<Matrix> povm(2, identity(4) / 2.0);
  std::vector<Matrix> prep{ket_projector(1), ket_projector(2)};
  return std::make_shared<const BiEntanglingGateSpec>(std::array<double, 3>{0.0, 0.0, 1.0}, std::vector<KrausPair>{},
                                                      std::vector<KrausPair>{}, MeasurePrepare(povm, prep),
                                                      std::nullopt, "uninformative");
}

SpecPtr dephasing_spec() {
  return std::make_shared<const BiEntanglingGateSpec>(std::array<double, 3>{1.0, 0.0, 0.0},
                                                      product_kraus_pairs(dephase(), identity_channel()),
                                                      std::vector<KrausPair>{}, std::nullopt, std::nullopt,
                                                      "dephase_first");
}

Circuit swapping_with(const SpecPtr& bell) {
  const Channel h = unitary(gates::hadamard(), "hadamard");
  const Channel cx = unitary(gates::cnot(), "cnot");
  Circuit c = make_circuit(4, {0, 1, 2, 3});
  c.add(h, 0).add(cx, 0, 1).add(h, 2).add(cx, 2, 3);
  c.add(bell, 1, 2);
  c.add(cx, 0, 3).add(h, 0);
  return c;
}

Circuit noisy_with(const SpecPtr& noisy) {
  Circuit c = make_circuit(4, {0, 2});
  c.add(unitary(gates::hadamard(), "hadamard"), 0);
  c.add(noisy, 0, 2);
  return c;
}

}  // namespace

Circuit entanglement_swapping_circuit() { return swapping_with(bell_swap_spec()); }

Circuit noisy_cnot_circuit(double p) {
  return noisy_with(std::make_shared<const BiEntanglingGateSpec>(noisy_cnot_spec(p)));
}

std::vector<GoldenCircuit> golden_suite() {
  const Channel h = unitary(gates::hadamard(), "hadamard");
  const Channel s = unitary(gates::phase_s(), "phase_s");
  const Channel t = unitary(gates::pi8(), "pi8");
  const Channel x = unitary(pauli('X'), "x");
  const Channel cx = unitary(gates::cnot(), "cnot");
  const SpecPtr noisy67 = std::make_shared<const BiEntanglingGateSpec>(noisy_cnot_spec(0.67));
  const SpecPtr noisy80 = std::make_shared<const BiEntanglingGateSpec>(noisy_cnot_spec(0.8));
  const SpecPtr swp = std::make_shared<const BiEntanglingGateSpec>(swap_spec());
  const SpecPtr bell = bell_swap_spec();
  const SpecPtr mixed = mixed_spec();

  std::vector<GoldenCircuit> out;

  {
    Circuit c = make_circuit(2, {0, 1});
    c.add(h, 0).add(cx, 0, 1);
    out.push_back({"bell", "H and CNOT inside one pair", std::move(c)});
  }
  out.push_back({"entanglement_swapping", "Bell measurement across two Bell pairs, Bell readout of the outer qubits",
                 swapping_with(bell)});
  out.push_back({"noisy_cnot_67", "Bell attempt through a 67% depolarized CNOT across pairs", noisy_with(noisy67)});
  {
    Circuit c = make_circuit(4, {0, 1, 2, 3});
    c.add(h, 0).add(cx, 0, 1).add(x, 2).add(swp, 1, 2).add(t, 0).add(cx, 0, 2).add(h, 0);
    out.push_back({"swap_branch", "logical swap moves half of a Bell pair into another pair", std::move(c)});
  }
  {
    Circuit c = make_circuit(4, {0, 1, 2, 3});
    c.init[2] = init_state_from_ref("+");
    c.add(h, 0).add(cx, 0, 1).add(dephasing_spec(), 1, 2).add(h, 0).add(h, 1).add(h, 2);
    out.push_back({"separable_dephasing", "dephasing one half of a Bell pair through a separable branch", std::move(c)});
  }
  {
    Circuit c = make_circuit(4, {0, 1, 2, 3});
    c.add(h, 0).add(cx, 0, 1).add(h, 3).add(cx, 3, 2).add(mixed, 1, 2).add(h, 0).add(h, 3);
    out.push_back({"mixed_weights", "all three branches with weights 1/2, 1/4, 1/4", std::move(c)});
  }
  {
    Circuit c = make_circuit(8, {0, 1, 2, 3, 4, 5, 6, 7});
    c.add(h, 0).add(h, 2).add(h, 4).add(h, 6);
    c.add(cx, 0, 1).add(cx, 2, 3).add(cx, 4, 5);
    c.add(bell, 1, 2).add(noisy80, 3, 4).add(swp, 5, 6).add(mixed, 0, 7);
    c.add(t, 2).add(s, 5).add(noisy67, 6, 1).add(h, 1).add(h, 6).add(mixed, 2, 3).add(t, 7).add(h, 4);
    c.add(dephase(), 3);
    out.push_back({"eight_qubit_mixed", "eight qubits, twenty gates of every kind", std::move(c)});
  }
  {
    Circuit c = make_circuit(4, {0, 1, 2, 3});
    c.init = {init_state_from_ref("mixed"), init_state_from_ref("+i"), init_state_from_ref("1"),
              init_state_from_ref("-")};
    c.add(h, 1).add(cx, 1, 0).add(noisy80, 1, 2).add(h, 3).add(noisy80, 2, 3).add(s, 2).add(h, 2);
    out.push_back({"mixed_init", "mixed and non-computational initial states", std::move(c)});
  }
  {
    Circuit c = make_circuit(3, {0, 1, 2});
    c.pad = true;
    c.add(h, 0).add(cx, 0, 1).add(swp, 1, 2).add(h, 1);
    out.push_back({"odd_padded", "three qubits with an idle partner", std::move(c)});
  }
  {
    Circuit c = make_circuit(4, {0, 1, 2, 3});
    c.add(h, 0).add(cx, 0, 1).add(h, 2).add(cx, 2, 3).add(computational_eb_spec(), 1, 2);
    out.push_back({"eb_computational", "Z measurement on halves of two Bell pairs, reset to |00>", std::move(c)});
  }
  {
    Circuit c = make_circuit(6, {0, 1, 2, 3, 4, 5});
    c.add(h, 0).add(cx, 0, 1).add(noisy80, 1, 2).add(h, 3).add(noisy80, 3, 4).add(noisy80, 2, 5).add(t, 5);
    c.add(noisy80, 4, 0).add(h, 0).add(h, 5);
    out.push_back({"noisy_chain", "chain of 80% depolarized CNOTs", std::move(c)});
  }
  {
    Circuit c = make_circuit(4, {0, 1, 2, 3});
    c.add(h, 0).add(cx, 0, 1).add(h, 2).add(cx, 2, 3).add(degenerate_spec(), 1, 2).add(t, 0).add(h, 0).add(s, 3);
    out.push_back({"degenerate_povm", "uninformative measurement across pairs", std::move(c)});
  }
  return out;
}

}  // namespace qctol
