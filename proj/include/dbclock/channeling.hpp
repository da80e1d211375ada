#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

// Semi-classical Monte Carlo of axial channeling transmission.
//
// Reduced units: lengths in units of the lattice spacing d (so d == 1 by
// default) and angles in radians. Each step carries the electron from one
// atom of the row to the next, applying the kick
//
//   dtheta_x = 2 L K y^2 z^2 x / m,   dtheta_y = 2 L K x^2 z^2 y / m
//
// followed by a drift over the lattice step.
namespace dbclock::channeling {

/// How the longitudinal offset z entering the kick is drawn each step.
enum class ZLaw {
  /// z ~ N(0, sigma).
  gaussian,
  /// u ~ U(-d/2, d/2) along the step and z^2 = z_ref^2 d g_sigma(u), with
  /// g_sigma the Gaussian of range sigma normalized over the step. The mean
  /// of z^2 is z_ref^2 for every sigma; sigma only shapes the fluctuation.
  normalized_weight,
};

[[nodiscard]] std::string_view to_string(ZLaw law);
[[nodiscard]] std::optional<ZLaw> parse_z_law(std::string_view text);

struct ChannelParams {
  double d = 1.0;
  double L = 1.0;
  // Calibrated for a zero-tilt dip depth near its maximum (about 0.27) at
  // the default statistics; see README.
  double K = 0.0198;
  double sigma = 0.25;
  double m = 158.27386;  // gamma of the 3.84 A resonance
  std::size_t n_steps = 1000;
  std::size_t n_traj = 2000;
  double cell_half_width = 0.5;
  double theta_acceptance = 0.5e-3;
  std::uint64_t seed = 20100101;

  ZLaw z_law = ZLaw::normalized_weight;
  double z_ref = 0.25;           // normalized_weight only
  bool periodic_cell = true;     // evaluate the kick in the cell of the nearest row
  bool drift_uses_step = false;  // drift over L instead of d
  double excursion_cap = 5.0;    // |x|, |y| beyond this -> lost

  /// Throws std::domain_error on any invalid field.
  void validate() const;
};

struct Kick {
  double d_theta_x;
  double d_theta_y;
};

struct TrajectoryState {
  double x = 0.0;
  double y = 0.0;
  double theta_x = 0.0;
  double theta_y = 0.0;
  std::size_t step_index = 0;
  bool lost = false;
};

struct KickRecord {
  std::size_t step;
  double z;
  double d_theta_x;
  double d_theta_y;
};

struct TransmissionPoint {
  double tilt;
  std::size_t n_transmitted;
  std::size_t n_total;
  double fraction;
  double std_error;  // binomial sqrt(f (1 - f) / n)
};

struct DipStats {
  double plateau;
  double depth;
  std::optional<double> fwhm;  // absent when no dip is detected
  double center;
  bool detected;
};

/// Per-trajectory generator. The stream is a pure function of
/// (seed, tilt index, trajectory index).
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t tilt_index, std::uint64_t traj_index);

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>{lo, hi}(engine_); }
  double normal(double sigma) { return std::normal_distribution<double>{0.0, sigma}(engine_); }

  /// Description of the substream scheme, recorded in run provenance.
  static constexpr std::string_view scheme =
      "mt19937_64 seeded by splitmix64(seed ^ splitmix64(tilt_index ^ splitmix64(traj_index)))";

 private:
  std::mt19937_64 engine_;
};

[[nodiscard]] Kick step_deflection(double x, double y, double z, const ChannelParams& params);

/// Draws the offset z for one step according to params.z_law.
[[nodiscard]] double draw_z(TrajectoryRng& rng, const ChannelParams& params);

/// Runs n_steps of kick + drift. When `log` is given, every step's kick is
/// appended to it.
[[nodiscard]] TrajectoryState propagate_trajectory(const TrajectoryState& entry,
                                                   const ChannelParams& params, TrajectoryRng& rng,
                                                   std::vector<KickRecord>* log = nullptr);

/// Entry state of trajectory `traj_index` at tilt `tilt`. Consumes the first
/// two draws of the stream.
[[nodiscard]] TrajectoryState sample_entry(double tilt, const ChannelParams& params,
                                           TrajectoryRng& rng);

[[nodiscard]] bool is_transmitted(const TrajectoryState& exit, double tilt,
                                  const ChannelParams& params);

/// Full scan. `threads == 0` uses the hardware concurrency. The result does
/// not depend on the thread count.
[[nodiscard]] std::vector<TransmissionPoint> transmission_scan(std::span<const double> tilt_grid,
                                                               const ChannelParams& params,
                                                               unsigned threads = 0);

/// Kick log of a single trajectory of a scan.
[[nodiscard]] std::vector<KickRecord> trajectory_kick_log(double tilt, std::size_t tilt_index,
                                                          std::size_t traj_index,
                                                          const ChannelParams& params);

[[nodiscard]] TransmissionPoint make_point(double tilt, std::size_t n_transmitted,
                                           std::size_t n_total);

[[nodiscard]] DipStats dip_statistics(std::span<const TransmissionPoint> profile);

/// L <- d, K <- l K, sigma <- l d / 4.
[[nodiscard]] ChannelParams rescaled_params(const ChannelParams& params, double l_multiplier);

/// n uniformly spaced tilts covering [lo, hi].
[[nodiscard]] std::vector<double> tilt_grid(double lo, double hi, std::size_t n);

/// CSV `step,z,dtheta_x,dtheta_y`.
void write_kick_log(std::ostream& out, std::span<const KickRecord> log);

}  // namespace dbclock::channeling
