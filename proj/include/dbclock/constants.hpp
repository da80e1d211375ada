#pragma once

#include <numbers>

namespace dbclock {

/// Native units of the library.
///
/// *   Length is expressed in fm.
/// *   Energy, mass and momentum are expressed in MeV (with c == 1 for
///     mass and momentum, i.e. MeV/c^2 and MeV/c are both written as MeV).
/// *   Time is expressed in seconds.
/// *   Angles are expressed in radians.
///
/// Multiply by a unit constant to convert into native units, divide by it to
/// convert out of them.
namespace units {
inline constexpr double fm = 1.0;
inline constexpr double angstrom = 1.0e5 * fm;
inline constexpr double nm = 1.0e6 * fm;
inline constexpr double MeV = 1.0;
inline constexpr double keV = 1.0e-3 * MeV;
inline constexpr double s = 1.0;
inline constexpr double mrad = 1.0e-3;
inline constexpr double urad = 1.0e-6;
}  // namespace units

/// Physical constants entering the resonance kinematics.
///
/// Only the reduced (hbar) quantities are stored. h and hc are always
/// derived as 2*pi times the stored value.
struct PhysicalConstants {
  double m0c2;    // rest-mass energy, MeV
  double hbar_c;  // MeV * fm
  double hbar_t;  // MeV * s
  double c;       // fm / s

  [[nodiscard]] constexpr double hc() const { return 2.0 * std::numbers::pi * hbar_c; }
  [[nodiscard]] constexpr double h() const { return 2.0 * std::numbers::pi * hbar_t; }

  /// Throws std::domain_error unless every field is finite and positive.
  void validate() const;

  /// Electron constants, CODATA 2018.
  static PhysicalConstants codata();

  /// Rounded electron values m0c2 = 0.511 MeV and hc = 1239.8 MeV fm. With
  /// these, d = 3.84 A gives alpha = 158.2707 and E = 80.876 MeV.
  static PhysicalConstants rounded();
};

}  // namespace dbclock
