#include "dbclock/relkin.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dbclock {

namespace {
bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_positive(double v, const char* what) {
  if (!positive_finite(v)) {
    throw std::domain_error(std::string(what) + " must be finite and positive");
  }
}
}  // namespace

void PhysicalConstants::validate() const {
  require_positive(m0c2, "m0c2");
  require_positive(hbar_c, "hbar_c");
  require_positive(hbar_t, "hbar_t");
  require_positive(c, "c");
}

PhysicalConstants PhysicalConstants::codata() {
  return {.m0c2 = 0.51099895000,
          .hbar_c = 197.3269804,
          .hbar_t = 6.582119569e-22,
          .c = 2.99792458e23};
}

PhysicalConstants PhysicalConstants::rounded() {
  return {.m0c2 = 0.511,
          .hbar_c = 1239.8 / (2.0 * std::numbers::pi),
          .hbar_t = 6.582119569e-22,
          .c = 2.99792458e23};
}

namespace relkin {

void ResonanceSetup::validate() const {
  require_positive(d, "lattice spacing d");
  require_positive(advance_per_period, "advance per period");
  require_positive(mass_scale, "mass scale");
}

double alpha_parameter(const ResonanceSetup& setup, const PhysicalConstants& consts) {
  setup.validate();
  consts.validate();
  // Kept as a single product chain so that doubling the advance doubles
  // alpha bit-exactly.
  return setup.advance_per_period * (consts.m0c2 * setup.mass_scale) / consts.hc();
}

Kinematics solve_beta_gamma(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::domain_error("alpha must be finite and non-negative");
  }
  const double gamma = std::hypot(1.0, alpha);
  return {.beta = alpha / gamma, .gamma = gamma};
}

LabPeriods lab_periods(double gamma, double mass_scale, const PhysicalConstants& consts) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw std::domain_error("gamma must be >= 1");
  }
  require_positive(mass_scale, "mass scale");
  consts.validate();
  const double rest = consts.m0c2 * mass_scale;
  const double t_wave = consts.h() / (rest * gamma);
  return {.t_clock_lab = consts.h() * gamma / rest, .t_wave = t_wave, .t_zb_lab = t_wave / 2.0};
}

ResonanceResult resonance_energy(const ResonanceSetup& setup, const PhysicalConstants& consts) {
  const double alpha = alpha_parameter(setup, consts);
  const auto [beta, gamma] = solve_beta_gamma(alpha);
  const double rest = consts.m0c2 * setup.mass_scale;
  const auto periods = lab_periods(gamma, setup.mass_scale, consts);
  return {.alpha = alpha,
          .beta = beta,
          .gamma = gamma,
          .energy_total = gamma * rest,
          .energy_approx = alpha * rest,
          .t_clock_lab = periods.t_clock_lab,
          .t_wave = periods.t_wave,
          .t_zb_lab = periods.t_zb_lab};
}

double coincidence_phase_shift(double beta0_expect, double gamma) {
  if (!(std::abs(beta0_expect) <= 1.0)) {
    throw std::domain_error("|<beta(0)>| must not exceed 1");
  }
  if (!(gamma >= 1.0)) {
    throw std::domain_error("gamma must be >= 1");
  }
  return beta0_expect * std::numbers::pi / gamma;
}

double effective_mass_ratio(double e_experimental, double e_theoretical) {
  require_positive(e_experimental, "experimental energy");
  require_positive(e_theoretical, "theoretical energy");
  return std::sqrt(e_experimental / e_theoretical);
}

}  // namespace relkin
}  // namespace dbclock
