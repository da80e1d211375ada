#pragma once

#include "dbclock/constants.hpp"

namespace dbclock::relkin {

/// Resonance condition: the particle covers `advance_per_period` during one
/// laboratory clock period while moving along a row of atoms spaced `d`.
struct ResonanceSetup {
  double d = 3.84 * units::angstrom;
  double advance_per_period = 3.84 * units::angstrom;
  double mass_scale = 1.0;  // m*/m0

  void validate() const;
};

struct Kinematics {
  double beta;   // v_gp / c
  double gamma;  // Lorentz factor
};

struct LabPeriods {
  double t_clock_lab;  // time-dilated clock period h*gamma/(m c^2), s
  double t_wave;       // h/E, s
  double t_zb_lab;     // h/(2E), s
};

struct ResonanceResult {
  double alpha;
  double beta;
  double gamma;
  double energy_total;   // exact, gamma * m0c2 * mass_scale, MeV
  double energy_approx;  // alpha * m0c2 * mass_scale, MeV (alpha >> 1 form)
  double t_clock_lab;
  double t_wave;
  double t_zb_lab;
};

/// alpha = L * m c^2 / (h c) with m = mass_scale * m0.
[[nodiscard]] double alpha_parameter(const ResonanceSetup& setup, const PhysicalConstants& consts);

/// Solves (beta*gamma)^2 = alpha^2, i.e. beta = alpha/sqrt(1+alpha^2).
[[nodiscard]] Kinematics solve_beta_gamma(double alpha);

[[nodiscard]] ResonanceResult resonance_energy(const ResonanceSetup& setup,
                                               const PhysicalConstants& consts);

[[nodiscard]] LabPeriods lab_periods(double gamma, double mass_scale,
                                     const PhysicalConstants& consts);

/// Phase advance between consecutive Zitterbewegung coincidence times,
/// <beta(0)> * pi / gamma.
[[nodiscard]] double coincidence_phase_shift(double beta0_expect, double gamma);

/// m*/m0 from an experimental and a theoretical resonance energy, using
/// E ~ m^2 at fixed lattice spacing.
[[nodiscard]] double effective_mass_ratio(double e_experimental, double e_theoretical);

}  // namespace dbclock::relkin
