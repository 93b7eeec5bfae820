#include "qctol/octahedron.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "qctol/bmachine.hpp"
#include "qctol/dense_oracle.hpp"
#include "qctol/optimize.hpp"

namespace qctol {

namespace {

constexpr double kGeomTol = 1e-9;

double plane_s(double theta) { return std::abs(std::cos(theta)) + std::abs(std::sin(theta)); }

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

// Canonical phase: first entry with magnitude above 1e-9 made real positive.
Matrix fix_phase(const Matrix& u) {
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const cplx v = u(k / u.cols(), k % u.cols());
    if (std::abs(v) > 1e-9) return u * (std::abs(v) / v);
  }
  return u;
}

}  // namespace

BlochVector BlochVector::checked(double x, double y, double z) {
  BlochVector r{x, y, z};
  if (r.l2() > 1.0 + kGeomTol) throw std::invalid_argument("Bloch vector longer than 1");
  return r;
}

BlochVector BlochVector::of(const Matrix& rho) {
  if (rho.rows() != 2 || rho.cols() != 2) throw std::invalid_argument("Bloch vector needs a 2x2 matrix");
  return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

double BlochVector::l1() const { return std::abs(x) + std::abs(y) + std::abs(z); }
double BlochVector::l2() const { return std::sqrt(x * x + y * y + z * z); }

bool in_octahedron(const BlochVector& r) { return r.l1() <= 1.0 + kGeomTol; }

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "generic") return NoiseKind::kGeneric;
  if (name == "dephasing") return NoiseKind::kDephasing;
  throw std::invalid_argument("unknown noise kind \"" + name + "\" (generic|dephasing)");
}

std::string to_string(NoiseKind kind) { return kind == NoiseKind::kGeneric ? "generic" : "dephasing"; }

PlaneThreshold min_generic_noise(double theta) {
  const double ax = std::cos(theta), ay = std::sin(theta);
  const double s = plane_s(theta);
  // Variables: p, ux+, ux-, uy+, uy- (u = p s with s in the disc).
  const std::array<std::array<double, 2>, 4> normals{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  LinearProgram lp;
  lp.c = RealVector::Zero(5);
  lp.c(0) = 1.0;
  lp.a_ub = RealMatrix::Zero(9, 5);
  lp.b_ub = RealVector::Zero(9);
  for (int k = 0; k < 4; ++k) {
    const double nx = normals[k][0], ny = normals[k][1];
    const double na = nx * ax + ny * ay;
    // Facet: (1 - p) n.a + n.u <= 1.
    lp.a_ub.row(k) << -na, nx, -nx, ny, -ny;
    lp.b_ub(k) = 1.0 - na;
    // Disc tangent at the facet-normal direction: m.u <= p.
    const double r = 1.0 / std::sqrt(2.0);
    lp.a_ub.row(4 + k) << -1.0, r * nx, -r * nx, r * ny, -r * ny;
  }
  lp.a_ub(8, 0) = 1.0;
  lp.b_ub(8) = 1.0;
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::kOptimal) throw std::runtime_error("min_generic_noise: LP failed");

  PlaneThreshold out;
  out.theta = theta;
  out.kind = NoiseKind::kGeneric;
  out.p = std::max(0.0, res.x(0));
  // |AB| / |AC|: A = a(theta), C the disc point opposite the violated facet,
  // B where segment AC meets that facet.
  out.analytic = std::max(0.0, (s - 1.0) / (s + std::sqrt(2.0)));
  if (out.p > 0.0) {
    const double r = 1.0 / std::sqrt(2.0);
    out.noise_point = {-sgn(ax) * r, -sgn(ay) * r, 0.0};
  }
  return out;
}

PlaneThreshold min_dephasing_noise(double theta) {
  PlaneThreshold out;
  out.theta = theta;
  out.kind = NoiseKind::kDephasing;
  out.p = std::max(0.0, 1.0 - 1.0 / plane_s(theta));
  out.analytic = out.p;
  return out;
}

PlaneThreshold plane_threshold(double theta, NoiseKind kind) {
  return kind == NoiseKind::kGeneric ? min_generic_noise(theta) : min_dephasing_noise(theta);
}

Channel plane_channel(double x, double y) {
  if (x * x + y * y > 1.0 + kGeomTol) throw std::invalid_argument("plane_channel: point outside the unit disc");
  Matrix c = Matrix::Zero(4, 4);
  c(0, 0) = c(3, 3) = 0.5;
  c(0, 3) = cplx(x, -y) / 2.0;
  c(3, 0) = cplx(x, y) / 2.0;
  return Channel(ChoiState(c), "plane");
}

BlochVector plane_point(const ChoiState& choi) {
  if (choi.num_qubits() != 1) throw std::invalid_argument("plane_point: one-qubit channel required");
  const cplx c = choi.matrix()(0, 3);
  return {2.0 * c.real(), -2.0 * c.imag(), 0.0};
}

BellTwirl bell_twirl(const Channel& channel) {
  if (channel.num_qubits() != 1) throw std::invalid_argument("bell_twirl: one-qubit channel required");
  const Matrix& r = channel.choi().matrix();
  const std::array<char, 4> names{'I', 'X', 'Y', 'Z'};
  const double h = 1.0 / std::sqrt(2.0);
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = h;

  BellTwirl out;
  Matrix bell(4, 4);
  out.twirled_choi = Matrix::Zero(4, 4);
  out.noise_choi = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const Matrix s = pauli(names[i]);
    const Matrix ss = kron(s, s);
    const Matrix conj = ss * r * ss.adjoint();
    out.twirled_choi += 0.25 * conj;
    if (i > 0) out.noise_choi += conj / 3.0;
    bell.col(i) = kron(identity(2), s) * phi;
    out.weights[i] = (bell.col(i).adjoint() * r * bell.col(i))(0, 0).real();
  }
  const Matrix in_bell = bell.adjoint() * out.twirled_choi * bell;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) out.off_diagonal = std::max(out.off_diagonal, std::abs(in_bell(i, j)));
  const Matrix target = pauli_channel(out.weights).choi().matrix();
  out.mixture_error = (0.25 * r + 0.75 * out.noise_choi - target).cwiseAbs().maxCoeff();
  return out;
}

const std::vector<Matrix>& clifford1q_group() {
  static const std::vector<Matrix> group = [] {
    const std::array<Matrix, 2> gens{gates::hadamard(), gates::phase_s()};
    std::vector<Matrix> found{fix_phase(identity(2))};
    for (std::size_t i = 0; i < found.size(); ++i)
      for (const Matrix& g : gens) {
        const Matrix next = fix_phase(g * found[i]);
        const bool known = std::any_of(found.begin(), found.end(),
                                       [&](const Matrix& m) { return std::abs(hs_overlap_abs(m, next) - 2.0) < 1e-9; });
        if (!known) found.push_back(next);
      }
    return found;
  }();
  return group;
}

namespace {

struct RandomOp {
  int kind;  // 0 H, 1 S, 2 CNOT, 3 measure
  int a;
  int b;
};

Observation0Report check_circuit(int n, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int> length(1, 20);
  std::uniform_int_distribution<int> qubit(0, n - 1);
  std::uniform_int_distribution<int> kind(0, n >= 2 ? 3 : 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<RandomOp> ops(static_cast<std::size_t>(length(rng)));
  for (RandomOp& op : ops) {
    int k = kind(rng);
    if (n < 2 && k == 2) k = 3;
    op.kind = k;
    op.a = qubit(rng);
    op.b = op.a;
    if (k == 2)
      while (op.b == op.a) op.b = qubit(rng);
  }

  const double r = 1.0 / std::sqrt(2.0);
  const std::array<Vector, 6> vertices = [&] {
    std::array<Vector, 6> v;
    v[0] = Vector::Zero(2), v[0] << r, r;
    v[1] = Vector::Zero(2), v[1] << r, -r;
    v[2] = Vector::Zero(2), v[2] << r, cplx(0, r);
    v[3] = Vector::Zero(2), v[3] << r, cplx(0, -r);
    v[4] = Vector::Zero(2), v[4] << 1, 0;
    v[5] = Vector::Zero(2), v[5] << 0, 1;
    return v;
  }();

  Observation0Report rep;
  rep.circuits = 1;
  const Matrix h = gates::hadamard(), s = gates::phase_s(), cx = gates::cnot();
  for (const Vector& v : vertices) {
    std::vector<Matrix> init(static_cast<std::size_t>(n), init_state_from_ref("0"));
    init[0] = v * v.adjoint();
    DenseState state(init);
    for (const RandomOp& op : ops) {
      const std::array<int, 1> one{op.a};
      const std::array<int, 2> two{op.a, op.b};
      switch (op.kind) {
        case 0: state.apply_unitary(h, one); break;
        case 1: state.apply_unitary(s, one); break;
        case 2: state.apply_unitary(cx, two); break;
        default: state.project(op.a, unif(rng) < state.probability_zero(op.a) ? 0 : 1); break;
      }
    }
    const std::array<int, 1> sys{0};
    const BlochVector out = BlochVector::of(state.reduced(sys));
    const double l1 = out.l1();
    const double dev = std::min(std::abs(l1), std::abs(l1 - 1.0));
    ++rep.inputs_checked;
    if (!in_octahedron(out)) ++rep.escapes;
    if (dev > 1e-9) ++rep.non_vertex_outputs;
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  return rep;
}

}  // namespace

Observation0Report observation0_check(int n_ancilla, int n_circuits, std::uint64_t seed, int threads) {
  if (n_ancilla < 0 || n_ancilla > 2) throw std::invalid_argument("observation0_check: 0 to 2 ancillas");
  if (n_circuits < 0) throw std::invalid_argument("observation0_check: negative circuit count");
  const int n = n_ancilla + 1;
  const int workers = std::max(1, std::min(worker_count(threads), std::max(n_circuits, 1)));
  std::vector<Observation0Report> partial(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    for (int i = w; i < n_circuits; i += workers) {
      const Observation0Report r = check_circuit(n, seed, static_cast<std::uint64_t>(i));
      Observation0Report& acc = partial[w];
      acc.circuits += r.circuits;
      acc.inputs_checked += r.inputs_checked;
      acc.escapes += r.escapes;
      acc.non_vertex_outputs += r.non_vertex_outputs;
      acc.max_deviation = std::max(acc.max_deviation, r.max_deviation);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  Observation0Report total;
  for (const auto& r : partial) {
    total.circuits += r.circuits;
    total.inputs_checked += r.inputs_checked;
    total.escapes += r.escapes;
    total.non_vertex_outputs += r.non_vertex_outputs;
    total.max_deviation = std::max(total.max_deviation, r.max_deviation);
  }
  return total;
}

}  // namespace qctol
