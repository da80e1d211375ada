#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "config.hpp"
#include "dbclock/channeling.hpp"
#include "dbclock/constants.hpp"
#include "dbclock/dirac.hpp"
#include "dbclock/relkin.hpp"

namespace dbclock::cli {

namespace {

using nlohmann::json;

/// Failure after the configuration was accepted. Maps to exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{}", v); }

// Validation errors raised by the engines while resolving a config are
// configuration errors, not runtime failures.
template <class F>
auto resolving(F&& f) {
  try {
    return f();
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
}

/// Writes `text` to `path`, or to `out` for "-". Verifies the file afterwards.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw RuntimeFailure(fmt::format("cannot open `{}` for writing", path));
    file << text;
    file.close();
    if (!file) throw RuntimeFailure(fmt::format("failed writing `{}`", path));
  }
  std::ifstream check(path, std::ios::binary | std::ios::ate);
  if (!check || static_cast<std::size_t>(check.tellg()) != text.size()) {
    throw RuntimeFailure(fmt::format("`{}` does not hold the expected {} bytes", path, text.size()));
  }
}

// ---------------------------------------------------------------- constants

std::vector<KeySpec> constant_keys() {
  return {{"constants", "rounded", "constant table: rounded (m0c2 = 0.511, hc = 1239.8) or codata"},
          {"m0c2", "auto", "rest-mass energy override, MeV"},
          {"hbar_c", "auto", "hbar c override, MeV fm"}};
}

PhysicalConstants resolve_constants(const RunConfig& cfg) {
  const auto& table = cfg.str("constants");
  PhysicalConstants c{};
  if (table == "rounded") {
    c = PhysicalConstants::rounded();
  } else if (table == "codata") {
    c = PhysicalConstants::codata();
  } else {
    throw ConfigError(fmt::format("`constants`: expected rounded or codata, got `{}`", table));
  }
  if (!cfg.is_auto("m0c2")) c.m0c2 = cfg.real("m0c2");
  if (!cfg.is_auto("hbar_c")) c.hbar_c = cfg.real("hbar_c");
  resolving([&] { c.validate(); return 0; });
  return c;
}

std::vector<KeySpec> with_constants(std::vector<KeySpec> keys) {
  auto all = constant_keys();
  all.insert(all.end(), keys.begin(), keys.end());
  return all;
}

// ---------------------------------------------------------------- resonance

struct Advance {
  std::string label;
  double fm;
};

// `d`, `2d`, `0.5d`, `2*d`, `d/2`, or a length with a unit: `3.84A`, `384000fm`,
// `0.384nm`. A bare number is read as angstrom.
Advance parse_advance(const std::string& token, double d_fm) {
  if (token.empty()) throw ConfigError("`advance`: empty entry");
  const std::string what = fmt::format("advance entry `{}`", token);
  if (token == "d") return {token, d_fm};
  if (token.rfind("d/", 0) == 0) {
    const double div = parse_real(token.substr(2), what);
    if (div == 0.0) throw ConfigError(what + ": division by zero");
    return {token, d_fm / div};
  }
  if (token.back() == 'd') {
    std::string factor = token.substr(0, token.size() - 1);
    if (!factor.empty() && factor.back() == '*') factor.pop_back();
    return {token, parse_real(factor, what) * d_fm};
  }
  static const std::pair<std::string_view, double> units_table[] = {
      {"fm", units::fm}, {"nm", units::nm}, {"A", units::angstrom}};
  for (const auto& [suffix, scale] : units_table) {
    if (token.size() > suffix.size() && token.ends_with(suffix)) {
      return {token, parse_real(token.substr(0, token.size() - suffix.size()), what) * scale};
    }
  }
  return {token, parse_real(token, what) * units::angstrom};
}

std::vector<KeySpec> resonance_keys() {
  return with_constants({
      {"d_angstrom", "3.84", "interatomic distance along the row, angstrom"},
      {"advance", "d/2,d,2d", "comma list of advances per clock period (d, 2d, d/2, 3.84A, 384000fm)"},
      {"mass_scale", "1", "m*/m0 multiplier"},
      {"e_exp", "none", "measured resonance energy, MeV; adds effective_mass_ratio"},
      {"output", "-", "JSON output path, - for standard output"},
  });
}

int cmd_resonance(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto consts = resolve_constants(cfg);
  const double d_fm = cfg.real("d_angstrom") * units::angstrom;
  const double mass_scale = cfg.real("mass_scale");
  const bool has_e_exp = cfg.str("e_exp") != "none";
  const double e_exp = has_e_exp ? cfg.real("e_exp") : 0.0;
  if (has_e_exp && !(e_exp > 0.0)) throw ConfigError("`e_exp` must be positive");

  std::vector<Advance> advances;
  for (const auto& token : split_list(cfg.str("advance"))) advances.push_back(parse_advance(token, d_fm));

  std::vector<relkin::ResonanceResult> results;
  for (const auto& a : advances) {
    const relkin::ResonanceSetup setup{.d = d_fm, .advance_per_period = a.fm, .mass_scale = mass_scale};
    results.push_back(resolving([&] { return relkin::resonance_energy(setup, consts); }));
  }

  json doc;
  doc["command"] = "resonance";
  doc["config"] = {{"constants", cfg.str("constants")},
                   {"m0c2", consts.m0c2},
                   {"hbar_c", consts.hbar_c},
                   {"hbar_t", consts.hbar_t},
                   {"d_angstrom", cfg.real("d_angstrom")},
                   {"advance", cfg.str("advance")},
                   {"mass_scale", mass_scale},
                   {"e_exp", has_e_exp ? json(e_exp) : json(nullptr)}};
  json records = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    json rec = {{"advance", advances[i].label},
                {"advance_fm", advances[i].fm},
                {"alpha", r.alpha},
                {"beta", r.beta},
                {"gamma", r.gamma},
                {"energy_exact_mev", r.energy_total},
                {"energy_approx_mev", r.energy_approx},
                {"t_clock_s", r.t_clock_lab},
                {"t_wave_s", r.t_wave},
                {"t_zb_s", r.t_zb_lab}};
    if (has_e_exp) rec["effective_mass_ratio"] = relkin::effective_mass_ratio(e_exp, r.energy_approx);
    records.push_back(std::move(rec));
  }
  doc["records"] = std::move(records);

  const auto& path = cfg.str("output");
  emit(path, doc.dump(2) + "\n", out);
  if (path != "-") {
    out << fmt::format("{:>10} {:>12} {:>14} {:>14} {:>14} {:>12} {:>12}\n", "advance", "alpha", "gamma",
                       "E_exact/MeV", "E_approx/MeV", "t_clock/s", "t_zb/s");
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      out << fmt::format("{:>10} {:>12.7f} {:>14.5f} {:>14.5f} {:>14.5f} {:>12.5e} {:>12.5e}\n",
                         advances[i].label, r.alpha, r.gamma, r.energy_total, r.energy_approx,
                         r.t_clock_lab, r.t_zb_lab);
    }
    if (has_e_exp) {
      for (std::size_t i = 0; i < results.size(); ++i) {
        out << fmt::format("m*/m0 ({} vs {:.3f} MeV): {:.6f}\n", advances[i].label,
                           results[i].energy_approx,
                           relkin::effective_mass_ratio(e_exp, results[i].energy_approx));
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- dirac-trajectory

std::vector<KeySpec> dirac_keys() {
  return with_constants({
      {"p_center", "0,0,0", "packet center momentum x,y,z, MeV/c"},
      {"p_spread", "0", "Gaussian momentum spread, MeV/c"},
      {"n_modes", "1", "momentum modes in the packet"},
      {"neg_fraction", "0.5", "negative-energy weight of every mode, 0..1"},
      {"n_samples", "601", "rows in the output"},
      {"n_periods", "3", "length of the time grid in Zitterbewegung periods of the center mode"},
      {"output", "-", "CSV output path, - for standard output"},
  });
}

dirac::Vec3 parse_vec3(const std::string& text, std::string_view what) {
  const auto parts = split_list(text);
  if (parts.size() != 3) throw ConfigError(fmt::format("`{}`: expected x,y,z", what));
  return {parse_real(parts[0], what), parse_real(parts[1], what), parse_real(parts[2], what)};
}

int cmd_dirac_trajectory(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto consts = resolve_constants(cfg);
  const dirac::PacketSpec spec{.p_center = parse_vec3(cfg.str("p_center"), "p_center"),
                               .p_spread = cfg.real("p_spread"),
                               .n_modes = cfg.count("n_modes"),
                               .neg_fraction = cfg.real("neg_fraction"),
                               .m0c2 = consts.m0c2};
  const std::size_t n_samples = cfg.count("n_samples");
  const double n_periods = cfg.real("n_periods");
  if (n_samples < 2) throw ConfigError("`n_samples` must be >= 2");
  if (!(n_periods > 0.0)) throw ConfigError("`n_periods` must be positive");
  const auto packet = resolving([&] { return dirac::build_packet(spec); });

  const double eps = dirac::energy(spec.p_center, consts.m0c2) / consts.m0c2;
  const double span = n_periods * std::numbers::pi / eps;

  std::string text = fmt::format(
      "# dirac-trajectory m0c2={} p_center={},{},{} p_spread={} n_modes={} neg_fraction={} "
      "n_samples={} n_periods={} units=natural(hbar=c=m0c2=1)\n",
      num(consts.m0c2), num(spec.p_center.x()), num(spec.p_center.y()), num(spec.p_center.z()),
      num(spec.p_spread), spec.n_modes, num(spec.neg_fraction), n_samples, num(n_periods));
  text += "t,rx,ry,rz,ux,uy,uz,beta_expect,phase\n";
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = span * static_cast<double>(k) / static_cast<double>(n_samples - 1);
    const auto s = dirac::trajectory_expectation(packet, t);
    text += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", t,
                        s.r_expect.x(), s.r_expect.y(), s.r_expect.z(), s.r_uniform.x(),
                        s.r_uniform.y(), s.r_uniform.z(), s.beta_expect, s.phase);
  }
  emit(cfg.str("output"), text, out);
  return kExitOk;
}

// ---------------------------------------------------------------- channel-scan

std::vector<KeySpec> channel_keys() {
  const channeling::ChannelParams def;
  return with_constants({
      {"d_angstrom", "3.84", "lattice spacing used for m = auto, angstrom"},
      {"mass_scale", "1", "m*/m0 used for m = auto"},
      {"d", num(def.d), "lattice spacing, model length unit"},
      {"L", "auto", "step length (auto: d)"},
      {"K", num(def.K), "coupling strength"},
      {"sigma", "auto", "Gaussian range (auto: L/4)"},
      {"m", "auto", "mass parameter of the kick (auto: gamma of the resonance times mass_scale)"},
      {"n_steps", fmt::format("{}", def.n_steps), "lattice steps per trajectory"},
      {"n_traj", fmt::format("{}", def.n_traj), "trajectories per tilt"},
      {"cell_half_width", "auto", "entry positions uniform in +-cell_half_width (auto: d/2)"},
      {"theta_acceptance", num(def.theta_acceptance), "exit acceptance half-angle, rad"},
      {"seed", fmt::format("{}", def.seed), "64-bit seed"},
      {"z_law", std::string(channeling::to_string(def.z_law)), "gaussian or normalized_weight"},
      {"z_ref", num(def.z_ref), "z scale of the normalized_weight law"},
      {"periodic_cell", "true", "evaluate the kick relative to the nearest row"},
      {"drift_uses_step", "false", "drift over L instead of d"},
      {"excursion_cap", num(def.excursion_cap), "|x|,|y| beyond this many d counts as lost"},
      {"tilt_min", "-0.002", "first tilt, rad"},
      {"tilt_max", "0.002", "last tilt, rad"},
      {"n_tilts", "41", "tilt grid points"},
      {"rescale", "none", "apply L <- d, K <- l K, sigma <- l d/4 with this l"},
      {"threads", "0", "worker threads, 0 for all cores (does not change results)"},
      {"output", "channel_scan.csv", "CSV output path, - for standard output"},
      {"summary", "auto", "summary JSON path (auto: next to the CSV, none: skip)"},
      {"kick_log", "", "optional CSV of one trajectory's kicks"},
      {"kick_log_tilt", "auto", "tilt index for kick_log (auto: middle of the grid)"},
      {"kick_log_traj", "0", "trajectory index for kick_log"},
  });
}

struct ChannelJob {
  channeling::ChannelParams params;
  double tilt_min;
  double tilt_max;
  std::size_t n_tilts;
};

ChannelJob resolve_channel(const RunConfig& cfg) {
  const auto consts = resolve_constants(cfg);
  channeling::ChannelParams p;
  p.d = cfg.real("d");
  p.L = cfg.is_auto("L") ? p.d : cfg.real("L");
  p.K = cfg.real("K");
  p.sigma = cfg.is_auto("sigma") ? p.L / 4.0 : cfg.real("sigma");
  if (cfg.is_auto("m")) {
    const double scale = cfg.real("mass_scale");
    const relkin::ResonanceSetup setup{.d = cfg.real("d_angstrom") * units::angstrom,
                                       .advance_per_period = cfg.real("d_angstrom") * units::angstrom,
                                       .mass_scale = scale};
    p.m = resolving([&] { return relkin::resonance_energy(setup, consts).gamma * scale; });
  } else {
    p.m = cfg.real("m");
  }
  p.n_steps = cfg.count("n_steps");
  p.n_traj = cfg.count("n_traj");
  p.cell_half_width = cfg.is_auto("cell_half_width") ? p.d / 2.0 : cfg.real("cell_half_width");
  p.theta_acceptance = cfg.real("theta_acceptance");
  p.seed = cfg.u64("seed");
  const auto law = channeling::parse_z_law(cfg.str("z_law"));
  if (!law) throw ConfigError(fmt::format("`z_law`: unknown law `{}`", cfg.str("z_law")));
  p.z_law = *law;
  p.z_ref = cfg.real("z_ref");
  p.periodic_cell = cfg.flag("periodic_cell");
  p.drift_uses_step = cfg.flag("drift_uses_step");
  p.excursion_cap = cfg.real("excursion_cap");
  if (cfg.str("rescale") != "none") {
    const double l = cfg.real("rescale");
    p = resolving([&] { return channeling::rescaled_params(p, l); });
  }
  resolving([&] { p.validate(); return 0; });

  ChannelJob job{.params = p,
                 .tilt_min = cfg.real("tilt_min"),
                 .tilt_max = cfg.real("tilt_max"),
                 .n_tilts = cfg.count("n_tilts")};
  (void)resolving([&] { return channeling::tilt_grid(job.tilt_min, job.tilt_max, job.n_tilts); });
  return job;
}

// Everything that determines the scan output, in config-key form.
std::string channel_header(const ChannelJob& job) {
  const auto& p = job.params;
  return fmt::format(
      "# channel-scan d={} L={} K={} sigma={} m={} n_steps={} n_traj={} cell_half_width={} "
      "theta_acceptance={} seed={} z_law={} z_ref={} periodic_cell={} drift_uses_step={} "
      "excursion_cap={} tilt_min={} tilt_max={} n_tilts={}\n",
      num(p.d), num(p.L), num(p.K), num(p.sigma), num(p.m), p.n_steps, p.n_traj,
      num(p.cell_half_width), num(p.theta_acceptance), p.seed, channeling::to_string(p.z_law),
      num(p.z_ref), p.periodic_cell, p.drift_uses_step, num(p.excursion_cap), num(job.tilt_min),
      num(job.tilt_max), job.n_tilts);
}

json params_json(const ChannelJob& job) {
  const auto& p = job.params;
  return {{"d", p.d},
          {"L", p.L},
          {"K", p.K},
          {"sigma", p.sigma},
          {"m", p.m},
          {"n_steps", p.n_steps},
          {"n_traj", p.n_traj},
          {"cell_half_width", p.cell_half_width},
          {"theta_acceptance", p.theta_acceptance},
          {"seed", p.seed},
          {"z_law", channeling::to_string(p.z_law)},
          {"z_ref", p.z_ref},
          {"periodic_cell", p.periodic_cell},
          {"drift_uses_step", p.drift_uses_step},
          {"excursion_cap", p.excursion_cap},
          {"tilt_min", job.tilt_min},
          {"tilt_max", job.tilt_max},
          {"n_tilts", job.n_tilts}};
}

std::string summary_path(const RunConfig& cfg) {
  const auto& s = cfg.str("summary");
  if (s != "auto") return s == "none" ? std::string{} : s;
  const auto& csv = cfg.str("output");
  if (csv == "-") return {};
  const std::string stem = csv.ends_with(".csv") ? csv.substr(0, csv.size() - 4) : csv;
  return stem + ".summary.json";
}

int cmd_channel_scan(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto job = resolve_channel(cfg);
  const unsigned threads = static_cast<unsigned>(cfg.count("threads"));
  const auto grid = channeling::tilt_grid(job.tilt_min, job.tilt_max, job.n_tilts);
  const std::string header = channel_header(job);

  std::optional<std::pair<std::size_t, std::size_t>> kick_target;
  if (!cfg.str("kick_log").empty()) {
    const std::size_t ti = cfg.is_auto("kick_log_tilt") ? job.n_tilts / 2 : cfg.count("kick_log_tilt");
    const std::size_t tj = cfg.count("kick_log_traj");
    if (ti >= job.n_tilts) throw ConfigError("`kick_log_tilt` is outside the tilt grid");
    if (tj >= job.params.n_traj) throw ConfigError("`kick_log_traj` is outside [0, n_traj)");
    kick_target.emplace(ti, tj);
  }

  const auto profile = channeling::transmission_scan(grid, job.params, threads);

  std::string csv = header;
  csv += "tilt_rad,n_transmitted,n_total,fraction,stderr\n";
  for (const auto& pt : profile) {
    csv += fmt::format("{:.9g},{},{},{:.9g},{:.9g}\n", pt.tilt, pt.n_transmitted, pt.n_total,
                       pt.fraction, pt.std_error);
  }
  const auto& csv_path = cfg.str("output");
  emit(csv_path, csv, out);

  std::optional<channeling::DipStats> dip;
  if (profile.size() >= 5) dip = channeling::dip_statistics(profile);

  if (const auto path = summary_path(cfg); !path.empty()) {
    json doc;
    doc["command"] = "channel-scan";
    doc["params"] = params_json(job);
    doc["rng"] = {{"scheme", channeling::TrajectoryRng::scheme}, {"seed", job.params.seed}};
    doc["csv"] = csv_path;
    doc["threads"] = threads;
    if (dip) {
      doc["dip"] = {{"plateau", dip->plateau},
                    {"depth", dip->depth},
                    {"fwhm", dip->fwhm ? json(*dip->fwhm) : json(nullptr)},
                    {"center", dip->center},
                    {"detected", dip->detected}};
    } else {
      doc["dip"] = nullptr;
    }
    emit(path, doc.dump(2) + "\n", out);
  }

  if (kick_target) {
    const auto [ti, tj] = *kick_target;
    const auto log = channeling::trajectory_kick_log(grid[ti], ti, tj, job.params);
    std::ostringstream text;
    text << header.substr(0, header.size() - 1)
         << fmt::format(" kick_log_tilt={} kick_log_traj={}\n", ti, tj);
    channeling::write_kick_log(text, log);
    emit(cfg.str("kick_log"), text.str(), out);
  }

  if (csv_path != "-" && dip) {
    out << fmt::format("plateau {:.4f}  depth {:.4f}  fwhm {}  center {:.6g} rad  {}\n", dip->plateau,
                       dip->depth, dip->fwhm ? fmt::format("{:.6g} rad", *dip->fwhm) : "n/a",
                       dip->center, dip->detected ? "dip detected" : "no dip above noise");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- dispatch

struct Subcommand {
  std::string name;
  std::string description;
  std::vector<KeySpec> keys;
  std::function<int(const RunConfig&, std::ostream&, std::ostream&)> execute;
};

std::vector<Subcommand> subcommands() {
  return {
      {"resonance", "Resonance energies, periods and effective mass", resonance_keys(), cmd_resonance},
      {"dirac-trajectory", "Expectation trajectory of a free Dirac packet", dirac_keys(),
       cmd_dirac_trajectory},
      {"channel-scan", "Monte Carlo transmission scan over tilt angle", channel_keys(), cmd_channel_scan},
  };
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto subs = subcommands();

  CLI::App app{"dbclock: channeling resonance kinematics, Dirac trajectories and transmission scans",
               "dbclock"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("dbclock 0.1.0"));

  std::vector<CLI::App*> handles;
  std::vector<std::string> config_paths(subs.size());
  std::vector<std::map<std::string, std::string>> flag_values(subs.size());
  std::vector<std::map<std::string, CLI::Option*>> flag_options(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* sub = app.add_subcommand(subs[i].name, subs[i].description);
    sub->add_option("--config", config_paths[i], "flat `key = value` config file");
    for (const auto& key : subs[i].keys) {
      auto& slot = flag_values[i][key.name];
      auto* opt = sub->add_option(flag_name(key.name), slot, key.help);
      if (!key.default_value.empty()) opt->default_str(key.default_value);
      flag_options[i][key.name] = opt;
    }
    handles.push_back(sub);
  }

  try {
    std::vector<const char*> argv{"dbclock"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!handles[i]->parsed()) continue;
    try {
      RunConfig cfg(subs[i].keys);
      if (!config_paths[i].empty()) cfg.merge(load_flat_config(config_paths[i]), config_paths[i]);
      for (const auto& [name, opt] : flag_options[i]) {
        if (opt->count() > 0) cfg.set(name, flag_values[i][name], "command line");
      }
      return subs[i].execute(cfg, out, err);
    } catch (const ConfigError& e) {
      err << "dbclock " << subs[i].name << ": configuration error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::exception& e) {
      err << "dbclock " << subs[i].name << ": " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitConfig;
}

}  // namespace dbclock::cli
