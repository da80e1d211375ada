#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "dbclock/constants.hpp"

// Free-particle Dirac dynamics in the Dirac-Pauli representation.
//
// Momenta are in MeV/c and rest energies in MeV at the interface. Expectation
// values are evaluated in natural units of the packet: hbar = c = 1 and
// energies measured in m0c2, so times are in hbar/m0c2 and lengths in
// hbar c/m0c2 (one reduced Compton wavelength).
namespace dbclock::dirac {

using Matrix4 = Eigen::Matrix4cd;
using Spinor = Eigen::Vector4cd;
using Vec3 = Eigen::Vector3d;

struct DiracMatrices {
  Matrix4 alpha_x;
  Matrix4 alpha_y;
  Matrix4 alpha_z;
  Matrix4 beta;

  [[nodiscard]] const Matrix4& alpha(int k) const;
};

/// beta = diag(1, 1, -1, -1); alpha_k = [[0, sigma_k], [sigma_k, 0]].
[[nodiscard]] const DiracMatrices& dirac_matrices();

/// H = alpha.p c + beta m0c2, in MeV.
[[nodiscard]] Matrix4 hamiltonian(const Vec3& p, double m0c2);

/// sqrt((pc)^2 + (m0c2)^2), MeV.
[[nodiscard]] double energy(const Vec3& p, double m0c2);

struct EnergyProjectors {
  Matrix4 plus;
  Matrix4 minus;
  double energy;  // E_p, MeV
};

/// P+- = (I +- H/E_p)/2. Together with E_p these are the full spectral
/// decomposition of H: H = E_p (P+ - P-).
[[nodiscard]] EnergyProjectors energy_projectors(const Vec3& p, double m0c2);

struct MomentumMode {
  Vec3 p = Vec3::Zero();  // MeV/c
  Spinor amplitude = Spinor::Zero();
  double weight = 1.0;
};

struct WavePacket {
  std::vector<MomentumMode> modes;
  double m0c2 = 0.0;  // MeV

  /// sum_k weight_k |amplitude_k|^2
  [[nodiscard]] double norm() const;
};

struct PacketSpec {
  Vec3 p_center = Vec3::Zero();
  double p_spread = 0.0;
  std::size_t n_modes = 1;
  double neg_fraction = 0.0;
  double m0c2 = 0.0;
};

/// Gaussian-weighted modes on a uniform grid spanning p_center +- 3 p_spread
/// along the p_center direction (z when p_center is zero). Each mode is
/// sqrt(1 - f) u+ + sqrt(f) u- with u+ the normalized P+ e0 and u- the
/// normalized P- e3.
[[nodiscard]] WavePacket build_packet(const PacketSpec& spec);

struct TrajectorySample {
  double t = 0.0;                  // hbar / m0c2
  Vec3 r_expect = Vec3::Zero();    // hbar c / m0c2, relative to <r(0)>
  Vec3 r_uniform = Vec3::Zero();   // <c^2 p / H> t
  double beta_expect = 0.0;
  double phase = 0.0;              // <beta(t)> t, radians
};

/// Heisenberg-picture expectations
///   r(t) = (c^2 p/H) t + (hbar/2iH)(exp(2iHt/hbar) - 1) F,  F = c alpha - c^2 p/H
///   beta(t) = m0c2/H + exp(2iHt/hbar) G,                   G = beta - m0c2/H
/// over a normalized packet, with <r(0)> = 0.
[[nodiscard]] TrajectorySample trajectory_expectation(const WavePacket& packet, double t);

struct ModeSummary {
  double energy;       // E_p / m0c2
  double beta0;        // <beta(0)>
  Vec3 group_velocity; // <c^2 p / H>
};

[[nodiscard]] ModeSummary summarize_mode(const MomentumMode& mode, double m0c2);

/// t_n = n pi hbar / E for n = 1..n_max, in seconds.
[[nodiscard]] std::vector<double> coincidence_times(double energy_mev, int n_max,
                                                    const PhysicalConstants& consts);

/// Same times in natural units, with E in units of m0c2.
[[nodiscard]] std::vector<double> coincidence_times_natural(double energy_ratio, int n_max);

struct OracleState {
  Spinor spinor;
  Vec3 alpha_expect;  // <c alpha>(t), units of c
  double beta_expect;
};

/// Direct Schroedinger-picture evolution psi(t) = exp(-iHt) psi(0) through a
/// numerical eigendecomposition of H. Expectations are per unit norm.
[[nodiscard]] OracleState evolve_oracle(const MomentumMode& mode, double m0c2, double t);

/// Displacement int_0^t <c alpha>(s) ds of the oracle state, by composite
/// Gauss-Legendre quadrature over sub-intervals of at most a quarter
/// Zitterbewegung period.
[[nodiscard]] Vec3 oracle_displacement(const MomentumMode& mode, double m0c2, double t);

struct SymmetryReport {
  double commutator_norm;                     // max |U H - H U|, MeV
  std::optional<double> phase_factor_error;   // only for p == 0
};

/// U(tau) = exp(-i tau H), tau in hbar/m0c2.
[[nodiscard]] SymmetryReport symmetry_check(double tau, const Vec3& p, double m0c2);

/// exp(-i tau H) from Eigen's self-adjoint eigensolver.
[[nodiscard]] Matrix4 evolution_operator(const Vec3& p, double m0c2, double tau);

}  // namespace dbclock::dirac
