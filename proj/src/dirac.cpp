#include "dbclock/dirac.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace dbclock::dirac {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

constexpr double kNormTolerance = 1e-12;

DiracMatrices make_matrices() {
  DiracMatrices m;
  m.beta = Matrix4::Zero();
  m.beta.diagonal() << 1.0, 1.0, -1.0, -1.0;

  const Eigen::Matrix2cd sx{{0.0, 1.0}, {1.0, 0.0}};
  const Eigen::Matrix2cd sy{{0.0, -I}, {I, 0.0}};
  const Eigen::Matrix2cd sz{{1.0, 0.0}, {0.0, -1.0}};
  auto off_diagonal = [](const Eigen::Matrix2cd& s) {
    Matrix4 a = Matrix4::Zero();
    a.topRightCorner<2, 2>() = s;
    a.bottomLeftCorner<2, 2>() = s;
    return a;
  };
  m.alpha_x = off_diagonal(sx);
  m.alpha_y = off_diagonal(sy);
  m.alpha_z = off_diagonal(sz);
  return m;
}

void require_rest_energy(double m0c2) {
  if (!(m0c2 > 0.0) || !std::isfinite(m0c2)) {
    throw std::domain_error("m0c2 must be finite and positive");
  }
}

double expect(const Spinor& psi, const Matrix4& op) { return psi.dot(op * psi).real(); }

// Operator functions of the mode Hamiltonian in natural units, built from
// its spectral split h = eps (P+ - P-).
struct ModeOperators {
  double eps;
  Vec3 q;
  Matrix4 plus;
  Matrix4 minus;
  Matrix4 h_inv;
};

ModeOperators mode_operators(const Vec3& p, double m0c2) {
  const auto proj = energy_projectors(p, m0c2);
  const double eps = proj.energy / m0c2;
  return {.eps = eps,
          .q = p / m0c2,
          .plus = proj.plus,
          .minus = proj.minus,
          .h_inv = (proj.plus - proj.minus) / eps};
}

}  // namespace

const Matrix4& DiracMatrices::alpha(int k) const {
  switch (k) {
    case 0: return alpha_x;
    case 1: return alpha_y;
    case 2: return alpha_z;
    default: throw std::out_of_range("alpha index must be 0, 1 or 2");
  }
}

const DiracMatrices& dirac_matrices() {
  static const DiracMatrices matrices = make_matrices();
  return matrices;
}

Matrix4 hamiltonian(const Vec3& p, double m0c2) {
  require_rest_energy(m0c2);
  const auto& m = dirac_matrices();
  return p.x() * m.alpha_x + p.y() * m.alpha_y + p.z() * m.alpha_z + m0c2 * m.beta;
}

double energy(const Vec3& p, double m0c2) { return std::hypot(p.norm(), m0c2); }

EnergyProjectors energy_projectors(const Vec3& p, double m0c2) {
  const Matrix4 h = hamiltonian(p, m0c2);
  const double e = energy(p, m0c2);
  const Matrix4 id = Matrix4::Identity();
  return {.plus = 0.5 * (id + h / e), .minus = 0.5 * (id - h / e), .energy = e};
}

double WavePacket::norm() const {
  double n = 0.0;
  for (const auto& mode : modes) n += mode.weight * mode.amplitude.squaredNorm();
  return n;
}

WavePacket build_packet(const PacketSpec& spec) {
  require_rest_energy(spec.m0c2);
  if (spec.n_modes == 0) throw std::domain_error("packet needs at least one mode");
  if (!(spec.neg_fraction >= 0.0 && spec.neg_fraction <= 1.0)) {
    throw std::domain_error("neg_fraction must lie in [0, 1]");
  }
  if (!(spec.p_spread >= 0.0) || !std::isfinite(spec.p_spread)) {
    throw std::domain_error("p_spread must be finite and non-negative");
  }
  if (spec.n_modes > 1 && spec.p_spread == 0.0) {
    throw std::domain_error("a multi-mode packet needs p_spread > 0");
  }
  if (!spec.p_center.allFinite()) throw std::domain_error("p_center must be finite");

  const double pc_norm = spec.p_center.norm();
  const Vec3 axis = pc_norm > 0.0 ? Vec3(spec.p_center / pc_norm) : Vec3::UnitZ();

  WavePacket packet;
  packet.m0c2 = spec.m0c2;
  packet.modes.reserve(spec.n_modes);

  const double a_plus = std::sqrt(1.0 - spec.neg_fraction);
  const double a_minus = std::sqrt(spec.neg_fraction);
  for (std::size_t k = 0; k < spec.n_modes; ++k) {
    double offset = 0.0;
    double weight = 1.0;
    if (spec.n_modes > 1) {
      offset = spec.p_spread * (-3.0 + 6.0 * static_cast<double>(k) /
                                           static_cast<double>(spec.n_modes - 1));
      weight = std::exp(-0.5 * (offset / spec.p_spread) * (offset / spec.p_spread));
    }
    const Vec3 p = spec.p_center + offset * axis;
    const auto proj = energy_projectors(p, spec.m0c2);
    const Spinor u_plus = (proj.plus * Spinor::Unit(0)).normalized();
    const Spinor u_minus = (proj.minus * Spinor::Unit(3)).normalized();
    packet.modes.push_back({.p = p, .amplitude = a_plus * u_plus + a_minus * u_minus,
                            .weight = weight});
  }

  const double n = packet.norm();
  for (auto& mode : packet.modes) mode.weight /= n;
  return packet;
}

ModeSummary summarize_mode(const MomentumMode& mode, double m0c2) {
  require_rest_energy(m0c2);
  const auto ops = mode_operators(mode.p, m0c2);
  const double n = mode.amplitude.squaredNorm();
  if (!(n > 0.0)) throw std::domain_error("mode amplitude must be nonzero");
  const double h_inv = expect(mode.amplitude, ops.h_inv) / n;
  return {.energy = ops.eps,
          .beta0 = expect(mode.amplitude, dirac_matrices().beta) / n,
          .group_velocity = ops.q * h_inv};
}

TrajectorySample trajectory_expectation(const WavePacket& packet, double t) {
  require_rest_energy(packet.m0c2);
  if (std::abs(packet.norm() - 1.0) > kNormTolerance) {
    throw std::domain_error("wave packet is not normalized");
  }
  const auto& dm = dirac_matrices();

  TrajectorySample sample;
  sample.t = t;
  Vec3 zb = Vec3::Zero();
  for (const auto& mode : packet.modes) {
    const auto ops = mode_operators(mode.p, packet.m0c2);
    const Spinor& psi = mode.amplitude;

    const cd phase_up = std::exp(2.0 * I * ops.eps * t);
    // (exp(2iht) - 1)/(2ih) on each eigenspace; the P- branch is the conjugate.
    const cd a_up = (phase_up - 1.0) / (2.0 * I * ops.eps);
    const Matrix4 displacement = a_up * ops.plus + std::conj(a_up) * ops.minus;
    const Matrix4 rotation = phase_up * ops.plus + std::conj(phase_up) * ops.minus;

    const double h_inv = expect(psi, ops.h_inv);
    for (int k = 0; k < 3; ++k) {
      const Matrix4 f = dm.alpha(k) - ops.q[k] * ops.h_inv;
      sample.r_uniform[k] += mode.weight * ops.q[k] * h_inv * t;
      zb[k] += mode.weight * expect(psi, displacement * f);
    }
    const Matrix4 g = dm.beta - ops.h_inv;
    sample.beta_expect += mode.weight * expect(psi, ops.h_inv + rotation * g);
  }
  sample.r_expect = sample.r_uniform + zb;
  sample.phase = sample.beta_expect * t;
  return sample;
}

std::vector<double> coincidence_times(double energy_mev, int n_max,
                                      const PhysicalConstants& consts) {
  if (!(energy_mev > 0.0)) throw std::domain_error("energy must be positive");
  if (n_max < 1) throw std::domain_error("n_max must be >= 1");
  consts.validate();
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) times.push_back(n * std::numbers::pi * consts.hbar_t / energy_mev);
  return times;
}

std::vector<double> coincidence_times_natural(double energy_ratio, int n_max) {
  if (!(energy_ratio > 0.0)) throw std::domain_error("energy must be positive");
  if (n_max < 1) throw std::domain_error("n_max must be >= 1");
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) times.push_back(n * std::numbers::pi / energy_ratio);
  return times;
}

Matrix4 evolution_operator(const Vec3& p, double m0c2, double tau) {
  const Matrix4 h = hamiltonian(p, m0c2) / m0c2;
  const Eigen::SelfAdjointEigenSolver<Matrix4> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  const Eigen::Vector4cd phases =
      (-I * tau * solver.eigenvalues().cast<cd>()).array().exp().matrix();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

OracleState evolve_oracle(const MomentumMode& mode, double m0c2, double t) {
  const double n = mode.amplitude.squaredNorm();
  if (!(n > 0.0)) throw std::domain_error("mode amplitude must be nonzero");
  const auto& dm = dirac_matrices();
  OracleState state;
  state.spinor = evolution_operator(mode.p, m0c2, t) * mode.amplitude;
  for (int k = 0; k < 3; ++k) state.alpha_expect[k] = expect(state.spinor, dm.alpha(k)) / n;
  state.beta_expect = expect(state.spinor, dm.beta) / n;
  return state;
}

Vec3 oracle_displacement(const MomentumMode& mode, double m0c2, double t) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const double eps = energy(mode.p, m0c2) / m0c2;
  const double quarter = std::numbers::pi / (4.0 * eps);
  const auto pieces = static_cast<int>(std::ceil(std::abs(t) / quarter));
  Vec3 out = Vec3::Zero();
  if (pieces == 0) return out;
  const double h = t / pieces;
  for (int k = 0; k < 3; ++k) {
    auto velocity = [&](double s) { return evolve_oracle(mode, m0c2, s).alpha_expect[k]; };
    for (int j = 0; j < pieces; ++j) out[k] += Rule::integrate(velocity, j * h, (j + 1) * h);
  }
  return out;
}

SymmetryReport symmetry_check(double tau, const Vec3& p, double m0c2) {
  if (!std::isfinite(tau)) throw std::domain_error("tau must be finite");
  const Matrix4 h = hamiltonian(p, m0c2);
  const Matrix4 u = evolution_operator(p, m0c2, tau);
  SymmetryReport report{.commutator_norm = (u * h - h * u).cwiseAbs().maxCoeff(),
                        .phase_factor_error = std::nullopt};
  if (p.isZero(0.0)) {
    Matrix4 expected = Matrix4::Zero();
    const cd down = std::exp(-I * tau);
    expected.diagonal() << down, down, std::conj(down), std::conj(down);
    report.phase_factor_error = (u - expected).cwiseAbs().maxCoeff();
  }
  return report;
}

}  // namespace dbclock::dirac
