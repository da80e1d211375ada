#pragma once

// Test-side timing of oscillations: locate extrema on a coarse grid and
// polish them with Brent's method on the function itself.

#include <boost/math/tools/minima.hpp>

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dbclock::testing {

struct Extremum {
  double t;
  double value;
};

inline std::vector<Extremum> find_maxima(const std::function<double(double)>& f, double t0,
                                         double t1, std::size_t samples) {
  std::vector<double> ts(samples);
  std::vector<double> fs(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    ts[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(samples - 1);
    fs[i] = f(ts[i]);
  }
  std::vector<Extremum> out;
  for (std::size_t i = 1; i + 1 < samples; ++i) {
    if (fs[i] > fs[i - 1] && fs[i] >= fs[i + 1]) {
      auto neg = [&](double t) { return -f(t); };
      const auto [t, v] = boost::math::tools::brent_find_minima(
          neg, ts[i - 1], ts[i + 1], std::numeric_limits<double>::digits);
      out.push_back({t, -v});
    }
  }
  return out;
}

inline std::vector<Extremum> find_minima(const std::function<double(double)>& f, double t0,
                                         double t1, std::size_t samples) {
  auto neg = [&](double t) { return -f(t); };
  auto maxima = find_maxima(neg, t0, t1, samples);
  for (auto& m : maxima) m.value = -m.value;
  return maxima;
}

/// Mean spacing of consecutive maxima.
inline double mean_period(const std::vector<Extremum>& maxima) {
  if (maxima.size() < 2) throw std::runtime_error("need at least two maxima");
  return (maxima.back().t - maxima.front().t) / static_cast<double>(maxima.size() - 1);
}

/// Parabolic refinement of sampled maxima (for data that only exists as a
/// sampled table, such as a CSV column).
inline std::vector<double> sampled_peak_times(const std::vector<double>& t,
                                              const std::vector<double>& v) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
      const double denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
      const double shift = 0.5 * (v[i - 1] - v[i + 1]) / denom;
      out.push_back(t[i] + shift * (t[i + 1] - t[i]));
    }
  }
  return out;
}

}  // namespace dbclock::testing
