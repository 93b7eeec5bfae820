#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "qctol/optimize.hpp"
#include "qctol/qmath.hpp"
#include "qctol/stabilizer_states.hpp"

using namespace qctol;

namespace {

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Kron, MatchesIndexLoop) {
  std::mt19937_64 rng(1);
  const Matrix a = random_unitary(2, rng), b = random_unitary(4, rng);
  EXPECT_LT(max_abs(kron(a, b) - oracle::kron(a, b)), 1e-14);
}

TEST(PartialTrace, MatchesIndexLoop) {
  std::mt19937_64 rng(2);
  const Matrix rho = random_density(8, rng);
  for (const std::vector<int>& keep : {std::vector<int>{0}, {1}, {2}, {0, 2}, {1, 2}, {0, 1}}) {
    const Matrix got = partial_trace(rho, 3, keep);
    EXPECT_LT(max_abs(got - oracle::partial_trace(rho, 3, keep)), 1e-14);
  }
}

TEST(PartialTrace, KeepIsSorted) {
  std::mt19937_64 rng(3);
  const Matrix rho = random_density(8, rng);
  const std::vector<int> a{2, 0}, b{0, 2};
  EXPECT_LT(max_abs(partial_trace(rho, 3, a) - partial_trace(rho, 3, b)), 1e-15);
}

TEST(PartialTranspose, MatchesIndexLoop) {
  std::mt19937_64 rng(4);
  const Matrix rho = random_density(16, rng);
  for (const std::vector<int>& pos : {std::vector<int>{0}, {3}, {1, 2}, {0, 1, 2, 3}}) {
    EXPECT_LT(max_abs(partial_transpose(rho, 4, pos) - oracle::partial_transpose(rho, 4, pos)), 1e-15);
  }
}

TEST(PartialTranspose, BellStateIsNpt) {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix rho = DensityMatrix::pure(bell, {"a", "b"});
  EXPECT_NEAR(min_pt_eigenvalue(rho, {{"a"}, {"b"}}), -0.5, 1e-12);
  EXPECT_FALSE(is_ppt(min_pt_eigenvalue(rho, {{"a"}, {"b"}})));
}

TEST(PauliExpand, MatchesTraceFormulaAndInverts) {
  std::mt19937_64 rng(5);
  const Matrix rho = random_density(4, rng);
  const RealVector r = pauli_expand(rho);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double want = (oracle::kron(oracle::pauli(i), oracle::pauli(j)) * rho).trace().real();
      EXPECT_NEAR(r(4 * i + j), want, 1e-13);
    }
  EXPECT_LT(max_abs(pauli_reconstruct(r) - rho), 1e-14);
}

TEST(DensityMatrix, RejectsInvalidInput) {
  Matrix m = Matrix::Identity(2, 2) / 2.0;
  m(0, 1) = 0.3;  // not Hermitian
  EXPECT_THROW(DensityMatrix{m}, std::invalid_argument);
  EXPECT_THROW(DensityMatrix{Matrix(Matrix::Identity(2, 2))}, std::invalid_argument);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  EXPECT_THROW(DensityMatrix{neg}, std::invalid_argument);
  EXPECT_THROW(DensityMatrix(Matrix(Matrix::Identity(2, 2) / 2.0), {"a", "b"}), std::invalid_argument);
}

TEST(Entropy, BellPairIsOneEbit) {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(entanglement_entropy_pure(bell, {"a", "b"}, {{"a"}, {"b"}}), 1.0, 1e-12);
  Vector prod = Vector::Zero(4);
  prod(0) = 1.0;
  EXPECT_NEAR(entanglement_entropy_pure(prod, {"a", "b"}, {{"a"}, {"b"}}), 0.0, 1e-12);
}

TEST(PermuteQubits, ReversalIsSwapConjugation) {
  std::mt19937_64 rng(6);
  const Matrix rho = random_density(4, rng);
  Matrix swap = Matrix::Zero(4, 4);
  swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
  const std::vector<int> perm{1, 0};
  EXPECT_LT(max_abs(permute_qubits(rho, perm) - swap * rho * swap), 1e-15);
}

TEST(SolveLp, SmallKnownOptimum) {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6.
  LinearProgram lp;
  lp.c = RealVector::Constant(2, -1.0);
  lp.a_ub.resize(2, 2);
  lp.a_ub << 1, 2, 3, 1;
  lp.b_ub = RealVector(2);
  lp.b_ub << 4, 6;
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x(0), 1.6, 1e-12);
  EXPECT_NEAR(r.x(1), 1.2, 1e-12);
}

TEST(SolveLp, DegenerateCyclingExample) {
  // Beale's example cycles under textbook pricing without anti-cycling.
  LinearProgram lp;
  lp.c = RealVector(4);
  lp.c << -0.75, 20, -0.5, 6;
  lp.a_ub.resize(3, 4);
  lp.a_ub << 0.25, -8, -1, 9, 0.5, -12, -0.5, 3, 0, 0, 1, 0;
  lp.b_ub = RealVector(3);
  lp.b_ub << 0, 0, 1;
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, -1.25, 1e-12);
}

TEST(SolveLp, InfeasibleAndUnbounded) {
  LinearProgram bad;
  bad.c = RealVector::Ones(1);
  bad.a_ub = RealMatrix::Ones(1, 1);
  bad.b_ub = RealVector::Constant(1, -1.0);
  EXPECT_EQ(solve_lp(bad).status, LpStatus::kInfeasible);
  LinearProgram open;
  open.c = RealVector::Constant(1, -1.0);
  EXPECT_EQ(solve_lp(open).status, LpStatus::kUnbounded);
}

TEST(Nnls, SatisfiesKkt) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  RealMatrix a(30, 12);
  RealVector b(30);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = g(rng);
  const NnlsResult r = nnls(a, b);
  const RealVector grad = a.transpose() * (a * r.x - b);
  for (Eigen::Index i = 0; i < r.x.size(); ++i) {
    EXPECT_GE(r.x(i), 0.0);
    if (r.x(i) > 1e-12)
      EXPECT_NEAR(grad(i), 0.0, 1e-9);
    else
      EXPECT_GE(grad(i), -1e-9);
  }
  EXPECT_NEAR(r.residual, (a * r.x - b).norm(), 1e-12);
}

TEST(StabilizerStates, CountsAndDistinct) {
  const std::vector<std::size_t> want{6, 60, 1080};
  for (int n = 1; n <= 3; ++n) {
    const auto& states = stabilizer_states(n);
    ASSERT_EQ(states.size(), want[n - 1]);
    for (const Vector& s : states) EXPECT_NEAR(s.norm(), 1.0, 1e-12);
    for (std::size_t i = 0; i < states.size() && n < 3; ++i)
      for (std::size_t j = i + 1; j < states.size(); ++j)
        EXPECT_LT(std::abs(states[i].dot(states[j])), 1.0 - 1e-9);
  }
}

TEST(StabilizerStates, TwoQubitStatesFormTwoDesign) {
  // Frame potential of an exact 2-design on d = 4: sum |<a|b>|^4 / N^2 = 2 / (d (d + 1)).
  const auto& states = stabilizer_states(2);
  double fp = 0.0;
  for (const Vector& a : states)
    for (const Vector& b : states) fp += std::pow(std::abs(a.dot(b)), 4);
  fp /= static_cast<double>(states.size() * states.size());
  EXPECT_NEAR(fp, 2.0 / 20.0, 1e-12);
}
