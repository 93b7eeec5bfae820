#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "qctol/bmachine.hpp"
#include "qctol/golden.hpp"
#include "qctol/thresholds.hpp"

using namespace qctol;

namespace {

// Pauli indices.
constexpr int I = 0, X = 1, Y = 2, Z = 3;

Ptm1 op_ptm(const Matrix& a) { return Ptm1(pauli_transfer_of_operator(a)); }

Matrix projector(int k, int dim = 2) {
  Matrix m = Matrix::Zero(dim, dim);
  m(k, k) = 1.0;
  return m;
}

MachineState bell_pairs() {
  Circuit c = make_circuit(4);
  MachineState s = init_machine(c);
  const Ptm1 h = ptm1_of(unitary(gates::hadamard()));
  const Ptm2 cx = ptm2_of(unitary(gates::cnot()));
  for (int q : {0, 2}) {
    apply_1q(s, h, q);
    apply_2q_in_pair(s, cx, q, q + 1);
  }
  return s;
}

int outcome_of(const BranchTrace& trace) {
  for (const std::string& t : trace)
    if (t.rfind("eb[", 0) == 0) return std::stoi(t.substr(3));
  return -1;
}

}  // namespace

TEST(InitMachine, ProductOfZeros) {
  const MachineState s = init_machine(make_circuit(4));
  ASSERT_EQ(s.pairs.size(), 2u);
  EXPECT_EQ(s.partner[0], 1);
  EXPECT_EQ(s.partner[3], 2);
  for (const PairState& p : s.pairs) {
    PairMatrix expected = PairMatrix::Zero();
    expected(I, I) = expected(I, Z) = expected(Z, I) = expected(Z, Z) = 1.0;
    EXPECT_EQ(p.r, expected);
  }
  EXPECT_EQ(s.state_size(), 32u);
}

TEST(InitMachine, ZeroPlusAndMixed) {
  Circuit c = make_circuit(2);
  c.init[1] = init_state_from_ref("+");
  const PairMatrix r = init_machine(c).pairs[0].r;
  EXPECT_NEAR(r(Z, I), 1.0, 1e-15);
  EXPECT_NEAR(r(I, X), 1.0, 1e-15);
  EXPECT_NEAR(r(Z, X), 1.0, 1e-15);
  EXPECT_NEAR(r(Z, Z), 0.0, 1e-15);

  c.init = {init_state_from_ref("mixed"), init_state_from_ref("mixed")};
  PairMatrix e0 = PairMatrix::Zero();
  e0(0, 0) = 1.0;
  EXPECT_LT((init_machine(c).pairs[0].r - e0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(InitMachine, OddCountNeedsPadding) {
  Circuit c = make_circuit(3);
  EXPECT_THROW(init_machine(c), std::invalid_argument);
  c.pad = true;
  const MachineState s = init_machine(c);
  EXPECT_TRUE(s.is_perfect_matching());
  EXPECT_EQ(s.num_qubits(), 4);
}

TEST(Apply1q, HadamardMovesZToX) {
  MachineState s = init_machine(make_circuit(2));
  apply_1q(s, ptm1_of(unitary(gates::hadamard())), 0);
  EXPECT_NEAR(s.pairs[0].r(X, I), 1.0, 1e-12);
  EXPECT_NEAR(s.pairs[0].r(Z, I), 0.0, 1e-12);
  EXPECT_NEAR(s.pairs[0].r(X, Z), 1.0, 1e-12);
  const PairMatrix before = s.pairs[0].r;
  apply_1q(s, Ptm1::Identity(), 1);
  EXPECT_EQ(s.pairs[0].r, before);
}

TEST(Apply1q, DepolarizingHalfOfBellPairLeavesMaximallyMixed) {
  MachineState s = bell_pairs();
  apply_1q(s, ptm1_of(depolarize()), 1);
  EXPECT_LT((pair_density(s.pairs[0]) - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Apply2qInPair, CnotOnPlusZeroGivesBellState) {
  const MachineState s = bell_pairs();
  const PairMatrix& r = s.pairs[0].r;
  EXPECT_NEAR(r(X, X), 1.0, 1e-12);
  EXPECT_NEAR(r(Y, Y), -1.0, 1e-12);
  EXPECT_NEAR(r(Z, Z), 1.0, 1e-12);
  EXPECT_NEAR(r(X, I), 0.0, 1e-12);
}

TEST(Apply2qInPair, SwapTransposesAndReversedTargetsMatchDense) {
  Circuit c = make_circuit(2);
  c.init = {init_state_from_ref("+i"), init_state_from_ref("1")};
  MachineState s = init_machine(c);
  const PairMatrix before = s.pairs[0].r;
  apply_2q_in_pair(s, ptm2_of(unitary(gates::swap())), 0, 1);
  EXPECT_LT((s.pairs[0].r - before.transpose()).cwiseAbs().maxCoeff(), 1e-12);

  // CNOT with control 1, target 0, against the dense product.
  MachineState t = init_machine(c);
  apply_1q(t, ptm1_of(unitary(gates::hadamard())), 1);
  apply_2q_in_pair(t, ptm2_of(unitary(gates::cnot())), 1, 0);
  oracle::Mat h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  oracle::Mat rho = oracle::kron(c.init[0], h * c.init[1] * h);
  oracle::Mat u = oracle::Mat::Zero(4, 4);  // control on the second qubit
  u(0, 0) = u(2, 2) = u(1, 3) = u(3, 1) = 1.0;
  rho = u * rho * u.adjoint();
  EXPECT_LT((pair_density(t.pairs[0]) - rho).cwiseAbs().maxCoeff(), 1e-12);

  EXPECT_THROW(apply_2q_in_pair(t, Ptm2::Identity(), 0, 2), std::invalid_argument);
}

TEST(SeparableBranch, IdentityPairIsANoOp) {
  MachineState s = bell_pairs();
  const MachineState before = s;
  CounterRng rng(1, 0);
  separable_branch(s, {{Ptm1::Identity(), Ptm1::Identity()}}, 1, 2, rng);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_LT((s.pairs[k].r - before.pairs[k].r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SeparableBranch, ProjectorsOnPlusAreFairCoins) {
  Circuit c = make_circuit(4);
  c.init[1] = init_state_from_ref("+");
  const MachineState start = init_machine(c);
  const std::vector<CompiledKrausPair> pairs{{op_ptm(projector(0)), Ptm1::Identity()},
                                             {op_ptm(projector(1)), Ptm1::Identity()}};
  int zeros = 0;
  const int n = 4000;
  for (int shot = 0; shot < n; ++shot) {
    MachineState s = start;
    CounterRng rng(3, static_cast<std::uint64_t>(shot));
    BranchTrace trace;
    separable_branch(s, pairs, 1, 2, rng, &trace);
    const double z = s.pair_of(1).r(I, Z);
    EXPECT_NEAR(std::abs(z), 1.0, 1e-12);
    if (trace.back() == "sep[0]") {
      ++zeros;
      EXPECT_NEAR(z, 1.0, 1e-12);
    }
    // Conditional states stay pure.
    const Matrix rho = pair_density(s.pair_of(1));
    EXPECT_NEAR((rho * rho).trace().real(), 1.0, 1e-12);
  }
  EXPECT_NEAR(zeros, n / 2, 4 * std::sqrt(n * 0.25));
}

TEST(SeparableBranch, VanishingWeightIsAShotError) {
  MachineState s = init_machine(make_circuit(4));
  CounterRng rng(1, 0);
  EXPECT_THROW(separable_branch(s, {{op_ptm(projector(1)), Ptm1::Identity()}}, 1, 2, rng), ShotError);
}

TEST(SwapBranch, PureSwapRelabels) {
  Circuit c = make_circuit(4);
  c.init = {init_state_from_ref("0"), init_state_from_ref("+"), init_state_from_ref("1"), init_state_from_ref("-")};
  MachineState s = init_machine(c);
  CounterRng rng(1, 0);
  swap_branch(s, {{Ptm1::Identity(), Ptm1::Identity()}}, 1, 2, rng);
  EXPECT_TRUE(s.is_perfect_matching());
  EXPECT_EQ(s.partner[0], 2);
  EXPECT_EQ(s.partner[1], 3);
  // Qubit 2 now holds |+>, qubit 1 holds |1>.
  const PairMatrix& r02 = s.pair_of(0).r;
  EXPECT_NEAR(r02(Z, I), 1.0, 1e-12);
  EXPECT_NEAR(r02(I, X), 1.0, 1e-12);
  const PairMatrix& r13 = s.pair_of(1).r;
  EXPECT_NEAR(r13(Z, I), -1.0, 1e-12);
  EXPECT_NEAR(r13(I, X), -1.0, 1e-12);
}

TEST(SwapBranch, SwapThenDephase) {
  Circuit c = make_circuit(4);
  c.init = {init_state_from_ref("0"), init_state_from_ref("+"), init_state_from_ref("1"), init_state_from_ref("+i")};
  MachineState s = init_machine(c);
  CounterRng rng(1, 0);
  std::vector<CompiledKrausPair> pairs;
  const Channel d = dephase();
  for (const Matrix& ka : d.kraus().ops)
    for (const Matrix& kb : d.kraus().ops) pairs.push_back({op_ptm(ka), op_ptm(kb)});
  swap_branch(s, pairs, 1, 2, rng);
  // The sampled dephasing Kraus pair leaves a diagonal state on both targets.
  EXPECT_NEAR(s.pair_of(2).r(I, X), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(s.pair_of(1).r(Z, I)), 1.0, 1e-12);
}

TEST(EbBranch, ComputationalMeasurementCollapsesPartners) {
  std::vector<Matrix> povm, prep;
  for (int k = 0; k < 4; ++k) {
    povm.push_back(projector(k, 4));
    prep.push_back(projector(0, 4));
  }
  const CompiledSpec spec = compile_spec(BiEntanglingGateSpec({0, 0, 1}, {}, {}, MeasurePrepare(povm, prep)));
  std::array<int, 4> seen{};
  for (int shot = 0; shot < 400; ++shot) {
    MachineState s = bell_pairs();
    CounterRng rng(8, static_cast<std::uint64_t>(shot));
    BranchTrace trace;
    eb_branch(s, spec.povm, spec.prepared, 1, 2, rng, &trace);
    const int k = outcome_of(trace);
    ASSERT_GE(k, 0);
    ++seen[k];
    EXPECT_EQ(s.partner[0], 3);
    EXPECT_EQ(s.partner[1], 2);
    const PairMatrix& r03 = s.pair_of(0).r;
    EXPECT_NEAR(r03(Z, I), 1.0 - 2.0 * (k >> 1), 1e-12);
    EXPECT_NEAR(r03(I, Z), 1.0 - 2.0 * (k & 1), 1e-12);
    EXPECT_NEAR(r03(X, X), 0.0, 1e-12);
    EXPECT_NEAR(s.pair_of(1).r(Z, Z), 1.0, 1e-12);
    EXPECT_NEAR(s.pair_of(1).r(Z, I), 1.0, 1e-12);
  }
  for (int k = 0; k < 4; ++k) EXPECT_GT(seen[k], 50);
}

TEST(EbBranch, BellMeasurementSwapsEntanglement) {
  const MeasurePrepare bm = bell_measurement(std::vector<Matrix>(4, projector(0, 4)));
  const CompiledSpec spec = compile_spec(BiEntanglingGateSpec({0, 0, 1}, {}, {}, bm));
  // Dense reference: Phi+ (x) Phi+, project (1,2) on each Bell element.
  oracle::Vec phi = oracle::Vec::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const oracle::Vec psi = oracle::kron(phi, phi);
  std::array<oracle::Mat, 4> expected;
  for (int k = 0; k < 4; ++k) {
    const oracle::Mat m = oracle::kron(oracle::kron(oracle::Mat::Identity(2, 2), bm.povm[k]), oracle::Mat::Identity(2, 2));
    const oracle::Mat post = m * psi * psi.adjoint() * m.adjoint();
    EXPECT_NEAR(post.trace().real(), 0.25, 1e-12);
    expected[k] = oracle::partial_trace(post, 4, {0, 3}) / post.trace();
  }
  std::array<int, 4> seen{};
  const int n = 8000;
  for (int shot = 0; shot < n; ++shot) {
    MachineState s = bell_pairs();
    CounterRng rng(17, static_cast<std::uint64_t>(shot));
    BranchTrace trace;
    eb_branch(s, spec.povm, spec.prepared, 1, 2, rng, &trace);
    const int k = outcome_of(trace);
    ++seen[k];
    const Matrix rho = pair_density(s.pair_of(0));
    EXPECT_LT((rho - expected[k]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR((rho * rho).trace().real(), 1.0, 1e-12);
  }
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(seen[k], n / 4, 4 * std::sqrt(n * 0.25 * 0.75)) << k;
}

TEST(EbBranch, DegeneratePovmLeavesPartnersMixedAsBefore) {
  std::vector<Matrix> povm(2, Matrix::Identity(4, 4) / 2.0);
  std::vector<Matrix> prep{projector(1, 4), projector(2, 4)};
  const CompiledSpec spec = compile_spec(BiEntanglingGateSpec({0, 0, 1}, {}, {}, MeasurePrepare(povm, prep)));
  MachineState s = bell_pairs();
  CounterRng rng(2, 0);
  eb_branch(s, spec.povm, spec.prepared, 1, 2, rng);
  EXPECT_LT((pair_density(s.pair_of(0)) - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CrossPair, WeightsSelectBranches) {
  const CompiledSpec sep =
      compile_spec(BiEntanglingGateSpec({1, 0, 0}, {{identity(2), identity(2)}}, {}, std::nullopt));
  MachineState s = bell_pairs();
  for (int shot = 0; shot < 20; ++shot) {
    CounterRng rng(4, static_cast<std::uint64_t>(shot));
    BranchTrace trace;
    apply_2q_cross_pair(s, sep, 1, 2, rng, &trace);
    EXPECT_EQ(trace.back(), "sep[0]");
    EXPECT_EQ(s.partner[1], 0);
  }
  const CompiledSpec eb = compile_spec(BiEntanglingGateSpec(
      {0, 0, 1}, {}, {}, bell_measurement(std::vector<Matrix>(4, projector(0, 4)))));
  CounterRng rng(4, 0);
  apply_2q_cross_pair(s, eb, 1, 2, rng);
  EXPECT_EQ(s.partner[1], 2);
  EXPECT_EQ(s.partner[0], 3);
}

TEST(Invariants, MatchingAndTraceHoldAfterEveryGate) {
  for (const GoldenCircuit& g : golden_suite()) {
    const CompiledCircuit cc(g.circuit);
    for (std::uint64_t shot = 0; shot < 50; ++shot) {
      MachineState s = cc.initial_state();
      CounterRng rng(99, shot);
      for (std::size_t k = 0; k < cc.steps().size(); ++k) {
        const auto& st = cc.steps()[k];
        rng.set_stream(k);
        if (st.arity == 1)
          apply_1q(s, st.one, st.targets[0]);
        else if (s.partner[st.targets[0]] == st.targets[1])
          apply_2q_in_pair(s, st.two, st.targets[0], st.targets[1]);
        else
          apply_2q_cross_pair(s, *st.spec, st.targets[0], st.targets[1], rng);
        ASSERT_TRUE(s.is_perfect_matching()) << g.name;
        for (const PairState& p : s.pairs) ASSERT_NEAR(p.r(0, 0), 1.0, 1e-9) << g.name;
        ASSERT_EQ(s.state_size(), 16u * s.pairs.size());
      }
    }
  }
}

TEST(Run, BasicCounts) {
  Circuit zero = make_circuit(2, {0});
  EXPECT_EQ(run(zero, 1000, 1), (Counts{{"0", 1000}}));

  Circuit h = make_circuit(2, {0, 1});
  h.add(unitary(gates::hadamard()), 0);
  const Counts c = run(h, 10000, 5);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_NEAR(c.at("00"), 5000, 4 * std::sqrt(10000 * 0.25));
}

TEST(Run, DeterministicAndThreadIndependent) {
  const Circuit c = golden_suite()[6].circuit;
  const Counts a = run(c, 3000, 42, 1);
  EXPECT_EQ(a, run(c, 3000, 42, 3));
  EXPECT_EQ(a, run(c, 3000, 42, 1));
  EXPECT_NE(a, run(c, 3000, 43, 1));
  const ShotResult s1 = sample_shot(CompiledCircuit(c), 42, 17, true);
  const ShotResult s2 = sample_shot(CompiledCircuit(c), 42, 17, true);
  EXPECT_EQ(s1.bits, s2.bits);
  EXPECT_EQ(s1.branch_trace, s2.branch_trace);
  EXPECT_FALSE(s1.branch_trace.empty());
}

TEST(Run, CrossPairChannelWithoutSpecIsAShotError) {
  Circuit c = make_circuit(4, {0, 3});
  c.add(unitary(gates::cnot()), 1, 2);
  EXPECT_THROW(run(c, 10, 1, 1), ShotError);
}

TEST(Spec, ValidationRejectsBadInput) {
  EXPECT_THROW(BiEntanglingGateSpec({0.5, 0.2, 0.2}, {{identity(2), identity(2)}}, {}, std::nullopt),
               std::invalid_argument);
  EXPECT_THROW(BiEntanglingGateSpec({1, 0, 0}, {}, {}, std::nullopt), std::invalid_argument);
  EXPECT_THROW(BiEntanglingGateSpec({1, 0, 0}, {{2.0 * identity(2), identity(2)}}, {}, std::nullopt),
               std::invalid_argument);
  EXPECT_THROW(BiEntanglingGateSpec({1, 0, 0}, {{identity(2), identity(2)}}, {}, std::nullopt,
                                    choi_of_unitary(gates::cnot()).matrix()),
               std::invalid_argument);
  EXPECT_THROW(noisy_cnot_spec(0.5), std::invalid_argument);
}

TEST(Spec, NoisyCnotMatchesReference) {
  const BiEntanglingGateSpec spec = noisy_cnot_spec(0.7);
  EXPECT_LT((spec.channel().choi().matrix() - noisy_cnot(0.7).choi().matrix()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(spec.weights()[0], 2 * 0.7 * 0.3, 1e-15);
}

TEST(CounterRng, ReproducibleAndUniform) {
  CounterRng a(5, 9), b(5, 9);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 0.02);
}
