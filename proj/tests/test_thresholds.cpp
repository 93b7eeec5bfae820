#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qctol/thresholds.hpp"

using namespace qctol;

namespace {

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

// (D_p (x) D_p) o CNOT from single-qubit depolarizers, with D_p = (1-p) id + p D.
oracle::Mat noisy_cnot_oracle(double p) {
  const oracle::Mat u = oracle::cnot();
  return oracle::choi(4, [&](const oracle::Mat& x) {
    const oracle::Mat y = u * x * u.adjoint();
    oracle::Mat out = oracle::Mat::Zero(4, 4);
    // Qubit-wise depolarization: sum over keep/replace for each output qubit.
    for (int keep0 = 0; keep0 < 2; ++keep0)
      for (int keep1 = 0; keep1 < 2; ++keep1) {
        const double w = (keep0 ? 1 - p : p) * (keep1 ? 1 - p : p);
        oracle::Mat term = y;
        if (!keep0) term = oracle::kron(oracle::Mat::Identity(2, 2) / 2.0, oracle::partial_trace(term, 2, {1}));
        if (!keep1) term = oracle::kron(oracle::partial_trace(term, 2, {0}), oracle::Mat::Identity(2, 2) / 2.0);
        out += w * term;
      }
    return out;
  });
}

// Input|output PT of the normalized outer term (1-p)^2 U + p^2 D(x)D.
double outer_min_pt(double p) {
  const oracle::Vec v = oracle::choi_vector(oracle::cnot());
  const double a = (1 - p) * (1 - p), b = p * p;
  const oracle::Mat rho = (a * v * v.adjoint() + b * oracle::Mat::Identity(16, 16) / 16.0) / (a + b);
  return oracle::min_eigenvalue(oracle::partial_transpose(rho, 4, {2, 3}));
}

double bisect_outer_threshold(double tol) {
  double lo = 0.0, hi = 1.0;  // NPT at lo, PPT at hi
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (outer_min_pt(mid) >= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Largest squared Schmidt coefficient of |CNOT> across (left | rest).
double max_schmidt_weight(const std::vector<int>& left) {
  const oracle::Mat rho = oracle::partial_trace(oracle::choi_vector(oracle::cnot()) * oracle::choi_vector(oracle::cnot()).adjoint(), 4, left);
  Eigen::SelfAdjointEigenSolver<oracle::Mat> eig(rho);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace

TEST(SymmetryGroup, CnotGroupIsLocalClosedAbelian) {
  const GateSymmetryGroup g = symmetry_group(gates::cnot());
  EXPECT_TRUE(g.is_local());
  EXPECT_TRUE(g.is_closed_up_to_phase());
  EXPECT_TRUE(g.is_abelian_up_to_phase());
  EXPECT_THROW(symmetry_group(Matrix::Identity(2, 2)), std::invalid_argument);
}

TEST(Eigenprojectors, OrthogonalCompleteWithMaximallyMixedMarginals) {
  const EigenBasis b = eigenprojectors(symmetry_group(gates::cnot()));
  Matrix sum = Matrix::Zero(16, 16);
  for (int e = 0; e < 16; ++e) {
    sum += b.projectors[e];
    EXPECT_LT(max_abs(oracle::partial_trace(b.projectors[e], 4, {0, 1}) - Matrix::Identity(4, 4) / 4.0), 1e-9);
    for (int f = 0; f < 16; ++f) {
      const Matrix prod = b.projectors[e] * b.projectors[f];
      EXPECT_LT(max_abs(e == f ? Matrix(prod - b.projectors[e]) : prod), 1e-10);
    }
  }
  EXPECT_LT(max_abs(sum - Matrix::Identity(16, 16)), 1e-10);
  const oracle::Vec v = oracle::choi_vector(oracle::cnot());
  EXPECT_LT(max_abs(b.projectors[0] - v * v.adjoint()), 1e-10);
}

TEST(Twirl, RandomChannelsBecomeDiagonal) {
  const GateSymmetryGroup g = symmetry_group(gates::cnot());
  const EigenBasis basis = eigenprojectors(g);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const TwirlResult t = twirl(random_channel(2, rng).choi(), g, basis);
    EXPECT_LT(t.off_diagonal, 1e-10);
    EXPECT_NEAR(t.lambda.sum(), 1.0, 1e-10);
    EXPECT_GE(t.lambda.minCoeff(), -1e-12);
  }
  const TwirlResult ideal = twirl(choi_of_unitary(gates::cnot()), g, basis);
  EXPECT_NEAR(ideal.lambda(0), 1.0, 1e-10);
}

TEST(SplitThreshold, CnotMatchesSchmidtWeightOracle) {
  // For a maximally entangled target, PPT states reach overlap equal to the
  // largest squared Schmidt coefficient; the threshold is one minus that.
  const std::vector<std::pair<SplitKind, std::vector<int>>> cases{
      {SplitKind::kS, {0, 2}}, {SplitKind::kSS, {0, 3}}, {SplitKind::kEB, {0, 1}}};
  for (const auto& [kind, left] : cases) {
    const ThresholdCertificate c = split_threshold(gates::cnot(), kind, 1e-6);
    EXPECT_NEAR(c.p_star, 1.0 - max_schmidt_weight(left), 1e-6) << to_string(kind);
    EXPECT_TRUE(c.valid) << to_string(kind);
    EXPECT_TRUE(c.tight) << to_string(kind);
    EXPECT_TRUE(verify_certificate(c).valid) << to_string(kind);
  }
}

TEST(SplitThreshold, IdentityAndSwapAreFreeAcrossTheirProductSplit) {
  EXPECT_NEAR(split_threshold(identity(4), SplitKind::kS).p_star, 0.0, 1e-6);
  EXPECT_NEAR(split_threshold(gates::swap(), SplitKind::kSS).p_star, 0.0, 1e-6);
}

TEST(SplitThreshold, RoundingNoiseInTheGateIsHarmless) {
  Matrix u = gates::cnot();
  u(0, 0) += cplx(1e-15, -2e-16);
  const SplitOptimum opt = max_ppt_lambda0(u, SplitKind::kS);
  EXPECT_NEAR(opt.lambda0, 0.5, 1e-7);
}

TEST(SplitThreshold, NonCliffordGateIsRejected) {
  Matrix u = identity(4);
  u(3, 3) = std::polar(1.0, 0.25 * std::acos(-1.0));  // controlled T
  EXPECT_THROW(max_ppt_lambda0(u, SplitKind::kS), std::invalid_argument);
  EXPECT_THROW(split_threshold(u, SplitKind::kEB), std::invalid_argument);
}

TEST(CnotDepolarizing, NoisyCnotMatchesQubitwiseOracle) {
  for (double p : {0.0, 0.3, 2.0 / 3.0, 1.0})
    EXPECT_LT(max_abs(noisy_cnot(p).choi().matrix() - noisy_cnot_oracle(p)), 1e-12) << p;
}

TEST(CnotDepolarizing, ThresholdMatchesBisectionOracle) {
  const CnotDepolarizingThreshold t = cnot_depolarizing_threshold(1e-7);
  EXPECT_NEAR(t.p_star, bisect_outer_threshold(1e-9), 1e-6);
  EXPECT_NEAR(t.p_star, 2.0 / 3.0, 1e-6);
  EXPECT_LE(t.p_low, t.p_high);
  EXPECT_LT(t.p_high - t.p_low, 1e-6);
}

TEST(CnotDepolarizing, OuterTermBoundaryAgainstLinearMix) {
  // Quadratic weights put the boundary at 2/3; a linear mix of CNOT with the
  // full depolarizer only becomes PPT at 4/5.
  EXPECT_NEAR(outer_min_pt(2.0 / 3.0), 0.0, 1e-12);
  EXPECT_NEAR(cnot_outer_min_pt_eigenvalue(2.0 / 3.0), 0.0, 1e-9);
  const oracle::Vec v = oracle::choi_vector(oracle::cnot());
  auto linear = [&](double p) {
    const oracle::Mat rho = (1 - p) * v * v.adjoint() + p * oracle::Mat::Identity(16, 16) / 16.0;
    return oracle::min_eigenvalue(oracle::partial_transpose(rho, 4, {2, 3}));
  };
  EXPECT_NEAR(linear(0.8), 0.0, 1e-12);
  EXPECT_LT(linear(0.79), 0.0);
  EXPECT_LT(linear(2.0 / 3.0), 0.0);
}

TEST(CnotDepolarizing, CertificateAtThresholdIsTight) {
  const ThresholdCertificate c = cnot_depolarizing_certificate(2.0 / 3.0 + 1e-7);
  EXPECT_TRUE(c.valid);
  EXPECT_TRUE(c.tight);
  EXPECT_LE(c.check("central_schmidt_tail"), 1e-10);
  EXPECT_LE(c.check("mirror_error"), 1e-10);
  EXPECT_LE(c.check("central_mixture_error"), 1e-10);
  EXPECT_LE(c.check("reconstruction_error"), 1e-9);
  EXPECT_TRUE(verify_certificate(c).valid);
  // Central part: eight pure product terms.
  double total = 0.0;
  for (const ProductTerm& t : c.upper_witness[0].terms) {
    total += t.weight;
    EXPECT_NEAR((t.left * t.left).trace().real(), 1.0, 1e-10);
    EXPECT_NEAR((t.right * t.right).trace().real(), 1.0, 1e-10);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(CnotDepolarizing, CertificateBelowThresholdIsInvalid) {
  const ThresholdCertificate c = cnot_depolarizing_certificate(0.5);
  EXPECT_FALSE(c.valid);
  EXPECT_LT(c.check("outer_min_pt_eigenvalue"), 0.0);
}

TEST(CnotDepolarizing, TamperedCertificateFailsVerification) {
  ThresholdCertificate c = cnot_depolarizing_certificate(0.7);
  ASSERT_TRUE(verify_certificate(c).valid);
  c.upper_witness[0].terms[0].weight *= 1.5;
  EXPECT_FALSE(verify_certificate(c).valid);
}

TEST(CnotDepolarizing, MirrorIdentityFromScratch) {
  // (I (x) D) CNOT equals the qubit-exchanged Hadamard conjugate of (D (x) I) CNOT.
  const oracle::Mat u = oracle::cnot();
  auto dep = [&](int q) {
    return oracle::choi(4, [&, q](const oracle::Mat& x) {
      const oracle::Mat y = u * x * u.adjoint();
      const oracle::Mat half = oracle::Mat::Identity(2, 2) / 2.0;
      return q == 0 ? oracle::kron(half, oracle::partial_trace(y, 2, {1}))
                    : oracle::kron(oracle::partial_trace(y, 2, {0}), half);
    });
  };
  oracle::Mat h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  const oracle::Mat h4 = oracle::kron(oracle::kron(h, h), oracle::kron(h, h));
  const oracle::Mat conj = h4 * dep(0) * h4;
  oracle::Mat swapped(16, 16);
  auto perm = [](int i) { return ((i >> 2) & 1) << 3 | ((i >> 3) & 1) << 2 | (i & 1) << 1 | ((i >> 1) & 1); };
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) swapped(perm(r), perm(c)) = conj(r, c);
  EXPECT_LT(max_abs(swapped - dep(1)), 1e-12);
}

TEST(Isotropic, ThresholdSeparatesPptFromNpt) {
  for (int d : {2, 4}) {
    const double t = isotropic_threshold(d);
    const int n = 2 * (d == 2 ? 1 : 2);
    std::vector<int> right;
    for (int q = n / 2; q < n; ++q) right.push_back(q);
    EXPECT_GE(oracle::min_eigenvalue(oracle::partial_transpose(isotropic_state(d, t + 1e-4), n, right)), 0.0);
    EXPECT_LT(oracle::min_eigenvalue(oracle::partial_transpose(isotropic_state(d, t - 1e-4), n, right)), 0.0);
  }
  EXPECT_NEAR(isotropic_threshold(4), 2.0 / 3.0, 1e-15);
}

TEST(BientMembership, CnotOutNoisyCnotIn) {
  const BientMembership out = bient_membership(choi_of_unitary(gates::cnot()));
  EXPECT_EQ(out.status, BientStatus::kCertifiedOutByPpt);
  const Channel noisy = noisy_cnot(2.0 / 3.0);
  const BientMembership in = bient_membership(noisy.choi());
  ASSERT_EQ(in.status, BientStatus::kCertifiedIn);
  Matrix sum = Matrix::Zero(16, 16);
  for (const ProductDecomposition& d : in.decomposition) sum += reconstruct(d);
  EXPECT_LT(max_abs(sum - noisy.choi().matrix()), 1e-8);
}

TEST(Omega, RefutesConvexHullConjecture) {
  const OmegaReport r = omega_analysis(200, 3);
  EXPECT_LT(r.marginal_error, 1e-9);
  EXPECT_TRUE(r.valid_choi);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(r.outcome_probability[k], 0.5, 1e-12);
    EXPECT_NEAR(r.ghz_fidelity[k], 1.0, 1e-10);
  }
  EXPECT_TRUE(r.outputs_separable);
  EXPECT_TRUE(r.genuine_tripartite);
  EXPECT_NE(r.membership, BientStatus::kCertifiedIn);
  EXPECT_TRUE(r.passed());
}

TEST(NondegenerateMeasurement, RankOneIsEntanglementBreaking) {
  std::vector<Matrix> povm, prep;
  const double s = 1.0 / std::sqrt(2.0);
  const std::array<std::array<cplx, 4>, 4> bell{{{s, 0, 0, s}, {s, 0, 0, -s}, {0, s, s, 0}, {0, s, -s, 0}}};
  for (int k = 0; k < 4; ++k) {
    Vector v(4);
    for (int i = 0; i < 4; ++i) v(i) = bell[k][i];
    povm.push_back(v * v.adjoint());
    prep.push_back(Matrix::Identity(4, 4) / 4.0);
  }
  const EbMeasurementCheck ok = nondegenerate_measurement_is_eb(MeasurePrepare(povm, prep));
  EXPECT_TRUE(ok.entanglement_breaking);
  ASSERT_TRUE(ok.decomposition.has_value());

  std::vector<Matrix> coarse{povm[0] + povm[1], povm[2] + povm[3]};
  std::vector<Matrix> coarse_prep{prep[0], prep[1]};
  const EbMeasurementCheck degenerate = nondegenerate_measurement_is_eb(MeasurePrepare(coarse, coarse_prep));
  EXPECT_FALSE(degenerate.entanglement_breaking);
  EXPECT_EQ(degenerate.offending_index, 0);
}

TEST(SplitKind, ParsesCaseInsensitively) {
  EXPECT_EQ(split_kind_from_string("eb"), SplitKind::kEB);
  EXPECT_EQ(split_kind_from_string("Ss"), SplitKind::kSS);
  EXPECT_THROW(split_kind_from_string("AB"), std::invalid_argument);
}
