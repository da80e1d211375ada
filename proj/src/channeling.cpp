#include "dbclock/channeling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

namespace dbclock::channeling {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::domain_error(what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

double cell_local(double u, double d) { return u - d * std::nearbyint(u / d); }

constexpr std::size_t kChunk = 250;

}  // namespace

std::string_view to_string(ZLaw law) {
  switch (law) {
    case ZLaw::gaussian: return "gaussian";
    case ZLaw::normalized_weight: return "normalized_weight";
  }
  return "unknown";
}

std::optional<ZLaw> parse_z_law(std::string_view text) {
  if (text == "gaussian") return ZLaw::gaussian;
  if (text == "normalized_weight") return ZLaw::normalized_weight;
  return std::nullopt;
}

void ChannelParams::validate() const {
  require(positive(d), "d must be positive");
  require(positive(L), "L must be positive");
  require(std::isfinite(K), "K must be finite");
  require(positive(sigma), "sigma must be positive");
  require(positive(m), "m must be positive");
  require(n_steps >= 1, "n_steps must be >= 1");
  require(n_traj >= 1, "n_traj must be >= 1");
  require(positive(cell_half_width), "cell_half_width must be positive");
  require(positive(theta_acceptance), "theta_acceptance must be positive");
  require(positive(z_ref), "z_ref must be positive");
  require(positive(excursion_cap), "excursion_cap must be positive");
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t tilt_index,
                             std::uint64_t traj_index)
    : engine_(splitmix64(seed ^ splitmix64(tilt_index ^ splitmix64(traj_index)))) {}

Kick step_deflection(double x, double y, double z, const ChannelParams& params) {
  // 2 L K is formed first: L -> 2L and K -> 2K then give bit-identical kicks.
  const double strength = 2.0 * params.L * params.K;
  const double zz = z * z;
  return {.d_theta_x = strength * (y * y) * zz * x / params.m,
          .d_theta_y = strength * (x * x) * zz * y / params.m};
}

double draw_z(TrajectoryRng& rng, const ChannelParams& params) {
  switch (params.z_law) {
    case ZLaw::gaussian:
      return rng.normal(params.sigma);
    case ZLaw::normalized_weight: {
      const double half = 0.5 * params.d;
      const double u = rng.uniform(-half, half);
      const double s = params.sigma;
      const double norm = std::erf(half / (std::numbers::sqrt2 * s));
      const double g = std::exp(-0.5 * (u / s) * (u / s)) /
                       (s * std::sqrt(2.0 * std::numbers::pi) * norm);
      return params.z_ref * std::sqrt(params.d * g);
    }
  }
  throw std::logic_error("unhandled z law");
}

TrajectoryState propagate_trajectory(const TrajectoryState& entry, const ChannelParams& params,
                                     TrajectoryRng& rng, std::vector<KickRecord>* log) {
  TrajectoryState s = entry;
  const double drift = params.drift_uses_step ? params.L : params.d;
  for (std::size_t i = 0; i < params.n_steps && !s.lost; ++i) {
    const double z = draw_z(rng, params);
    const double xl = params.periodic_cell ? cell_local(s.x, params.d) : s.x;
    const double yl = params.periodic_cell ? cell_local(s.y, params.d) : s.y;
    const auto kick = step_deflection(xl, yl, z, params);
    if (log != nullptr) log->push_back({i, z, kick.d_theta_x, kick.d_theta_y});
    s.theta_x += kick.d_theta_x;
    s.theta_y += kick.d_theta_y;
    s.x += drift * s.theta_x;
    s.y += drift * s.theta_y;
    s.step_index = i + 1;
    const bool finite = std::isfinite(s.x) && std::isfinite(s.y) &&
                        std::isfinite(s.theta_x) && std::isfinite(s.theta_y);
    if (!finite || std::abs(s.x) > params.excursion_cap * params.d ||
        std::abs(s.y) > params.excursion_cap * params.d) {
      s.lost = true;
    }
  }
  return s;
}

TrajectoryState sample_entry(double tilt, const ChannelParams& params, TrajectoryRng& rng) {
  TrajectoryState s;
  s.x = rng.uniform(-params.cell_half_width, params.cell_half_width);
  s.y = rng.uniform(-params.cell_half_width, params.cell_half_width);
  s.theta_x = tilt;
  s.theta_y = 0.0;
  return s;
}

bool is_transmitted(const TrajectoryState& exit, double tilt, const ChannelParams& params) {
  return !exit.lost && std::abs(exit.theta_x - tilt) <= params.theta_acceptance &&
         std::abs(exit.theta_y) <= params.theta_acceptance;
}

TransmissionPoint make_point(double tilt, std::size_t n_transmitted, std::size_t n_total) {
  require(n_total > 0, "a transmission point needs at least one trajectory");
  require(n_transmitted <= n_total, "more transmitted than launched");
  const double f = static_cast<double>(n_transmitted) / static_cast<double>(n_total);
  return {.tilt = tilt,
          .n_transmitted = n_transmitted,
          .n_total = n_total,
          .fraction = f,
          .std_error = std::sqrt(f * (1.0 - f) / static_cast<double>(n_total))};
}

std::vector<TransmissionPoint> transmission_scan(std::span<const double> tilts,
                                                 const ChannelParams& params, unsigned threads) {
  require(!tilts.empty(), "tilt grid must not be empty");
  params.validate();

  const std::size_t chunks_per_tilt = (params.n_traj + kChunk - 1) / kChunk;
  const std::size_t n_tasks = tilts.size() * chunks_per_tilt;
  std::vector<std::size_t> counts(n_tasks, 0);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      const std::size_t ti = task / chunks_per_tilt;
      const std::size_t first = (task % chunks_per_tilt) * kChunk;
      const std::size_t last = std::min(first + kChunk, params.n_traj);
      std::size_t hits = 0;
      for (std::size_t j = first; j < last; ++j) {
        TrajectoryRng rng(params.seed, ti, j);
        const auto entry = sample_entry(tilts[ti], params, rng);
        const auto exit = propagate_trajectory(entry, params, rng);
        if (is_transmitted(exit, tilts[ti], params)) ++hits;
      }
      counts[task] = hits;
    }
  };

  unsigned n_threads = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_tasks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  std::vector<TransmissionPoint> profile;
  profile.reserve(tilts.size());
  for (std::size_t ti = 0; ti < tilts.size(); ++ti) {
    std::size_t hits = 0;
    for (std::size_t c = 0; c < chunks_per_tilt; ++c) hits += counts[ti * chunks_per_tilt + c];
    profile.push_back(make_point(tilts[ti], hits, params.n_traj));
  }
  return profile;
}

std::vector<KickRecord> trajectory_kick_log(double tilt, std::size_t tilt_index,
                                            std::size_t traj_index, const ChannelParams& params) {
  params.validate();
  TrajectoryRng rng(params.seed, tilt_index, traj_index);
  const auto entry = sample_entry(tilt, params, rng);
  std::vector<KickRecord> log;
  log.reserve(params.n_steps);
  (void)propagate_trajectory(entry, params, rng, &log);
  return log;
}

DipStats dip_statistics(std::span<const TransmissionPoint> profile) {
  require(profile.size() >= 5, "dip statistics need at least 5 points");
  const std::size_t n = profile.size();
  const std::size_t k = std::max<std::size_t>(1, n / 5);

  double plateau = 0.0;
  double plateau_var = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& p : {profile[i], profile[n - 1 - i]}) {
      plateau += p.fraction;
      plateau_var += p.std_error * p.std_error;
    }
  }
  plateau /= static_cast<double>(2 * k);
  const double plateau_err = std::sqrt(plateau_var) / static_cast<double>(2 * k);

  // argmin; ties go to the point nearest the middle of the grid.
  std::size_t imin = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double fi = profile[i].fraction;
    const double fm = profile[imin].fraction;
    if (fi < fm || (fi == fm && std::abs(profile[i].tilt) < std::abs(profile[imin].tilt))) imin = i;
  }

  DipStats stats{.plateau = plateau,
                 .depth = std::max(0.0, plateau - profile[imin].fraction),
                 .fwhm = std::nullopt,
                 .center = profile[imin].tilt,
                 .detected = false};
  const double floor = 3.0 * std::hypot(plateau_err, profile[imin].std_error);
  if (!(stats.depth > floor) || stats.depth == 0.0) {
    stats.depth = std::max(stats.depth, 0.0);
    return stats;
  }
  stats.detected = true;

  // Outermost crossings of the half-depth level, scanning inwards.
  const double half = plateau - 0.5 * stats.depth;
  auto crossing = [&](std::size_t outer, std::size_t inner) {
    const auto& a = profile[outer];
    const auto& b = profile[inner];
    return a.tilt + (half - a.fraction) * (b.tilt - a.tilt) / (b.fraction - a.fraction);
  };
  std::optional<double> left;
  for (std::size_t i = 1; i <= imin; ++i) {
    if (profile[i].fraction < half && profile[i - 1].fraction >= half) {
      left = crossing(i - 1, i);
      break;
    }
  }
  std::optional<double> right;
  for (std::size_t i = n - 1; i-- > imin;) {
    if (profile[i].fraction < half && profile[i + 1].fraction >= half) {
      right = crossing(i + 1, i);
      break;
    }
  }
  if (left && right) stats.fwhm = *right - *left;
  return stats;
}

ChannelParams rescaled_params(const ChannelParams& params, double l_multiplier) {
  require(positive(l_multiplier), "l_multiplier must be positive");
  ChannelParams out = params;
  out.L = params.d;
  out.K = l_multiplier * params.K;
  out.sigma = l_multiplier * (params.d / 4.0);
  return out;
}

std::vector<double> tilt_grid(double lo, double hi, std::size_t n) {
  require(n >= 1, "tilt grid needs at least one point");
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, "tilt range must satisfy lo <= hi");
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> grid(n);
  const double span = static_cast<double>(n - 1);
  // Written so that a range symmetric about zero gives an exactly antisymmetric grid.
  for (std::size_t k = 0; k < n; ++k) {
    grid[k] = (lo * static_cast<double>(n - 1 - k) + hi * static_cast<double>(k)) / span;
  }
  return grid;
}

void write_kick_log(std::ostream& out, std::span<const KickRecord> log) {
  out << "step,z,dtheta_x,dtheta_y\n";
  for (const auto& r : log) out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", r.step, r.z, r.d_theta_x, r.d_theta_y);
}

}  // namespace dbclock::channeling
