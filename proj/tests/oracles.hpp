#pragma once

// Test-side reference computations. Written with explicit index loops and no
// calls into the library's linear-algebra helpers, so they can catch errors
// in those helpers.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline int bit(int index, int q, int n) { return (index >> (n - 1 - q)) & 1; }

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

// Transposes the listed qubits.
inline Mat partial_transpose(const Mat& m, int n, const std::vector<int>& qubits) {
  const int d = 1 << n;
  Mat out(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      int r2 = r, c2 = c;
      for (int q : qubits) {
        const int shift = n - 1 - q;
        const int br = (r >> shift) & 1, bc = (c >> shift) & 1;
        r2 = (r2 & ~(1 << shift)) | (bc << shift);
        c2 = (c2 & ~(1 << shift)) | (br << shift);
      }
      out(r2, c2) = m(r, c);
    }
  return out;
}

// Reduced state on `keep` (ascending order), by summing matching traced bits.
inline Mat partial_trace(const Mat& m, int n, const std::vector<int>& keep) {
  const int k = static_cast<int>(keep.size());
  Mat out = Mat::Zero(1 << k, 1 << k);
  const int d = 1 << n;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      bool traced_equal = true;
      for (int q = 0; q < n && traced_equal; ++q) {
        bool kept = false;
        for (int x : keep) kept = kept || x == q;
        if (!kept && bit(r, q, n) != bit(c, q, n)) traced_equal = false;
      }
      if (!traced_equal) continue;
      int rr = 0, cc = 0;
      for (int x : keep) {
        rr = (rr << 1) | bit(r, x, n);
        cc = (cc << 1) | bit(c, x, n);
      }
      out(rr, cc) += m(r, c);
    }
  return out;
}

inline double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.adjoint()));
  return eig.eigenvalues()(0);
}

inline Mat pauli(int i) {
  Mat p(2, 2);
  switch (i) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, cplx(0, -1), cplx(0, 1), 0; break;
    default: p << 1, 0, 0, -1; break;
  }
  return p;
}

// Choi state from the definition: (1/d) sum_ij |i><j| (x) E(|i><j|).
template <class Map>
Mat choi(int d, Map&& channel) {
  Mat out = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Mat eij = Mat::Zero(d, d);
      eij(i, j) = 1.0;
      out += kron(eij, channel(eij));
    }
  return out / static_cast<double>(d);
}

inline Mat choi_of_kraus(const std::vector<Mat>& ks) {
  const int d = static_cast<int>(ks.front().rows());
  return choi(d, [&](const Mat& x) {
    Mat y = Mat::Zero(d, d);
    for (const Mat& k : ks) y += k * x * k.adjoint();
    return y;
  });
}

inline Mat cnot() {
  Mat u = Mat::Zero(4, 4);
  u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
  return u;
}

// Von Neumann entropy in bits of the `left` qubits of a pure state on n qubits.
inline double entropy_bits(const Vec& psi, int n, const std::vector<int>& left) {
  const Mat rho = partial_trace(psi * psi.adjoint(), n, left);
  Eigen::SelfAdjointEigenSolver<Mat> eig(rho);
  double s = 0.0;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    const double l = eig.eigenvalues()(i);
    if (l > 1e-14) s -= l * std::log2(l);
  }
  return s;
}

// |U> = (I (x) U)|Phi+> over labels A1 A2 B1 B2.
inline Vec choi_vector(const Mat& u) {
  const int d = static_cast<int>(u.rows());
  Vec v = Vec::Zero(d * d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) v(i * d + k) += u(k, i) / std::sqrt(static_cast<double>(d));
  return v;
}

}  // namespace oracle
