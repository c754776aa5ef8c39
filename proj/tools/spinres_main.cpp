// spinres — command-line front door for the spin-ensemble resonator toolkit.
//
// Command groups: atom (hyperfine levels/fields/populations), sim (spectra,
// avoided-crossing maps, echo sequences, hole burning, repolarization),
// fit (resonator, coupled spectrum, gaussian scan, decays), od (optical
// depth), fixtures (canonical parameter sets + flagged comparisons).
//
// Exit codes: 0 success, 1 fit non-convergence, 2 input error.
// Determinism: all floats are emitted with fixed formatting, so identical
// inputs give byte-identical outputs at fixed --threads.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spinres/atomkit.hpp"
#include "spinres/cavity.hpp"
#include "spinres/constants.hpp"
#include "spinres/dynamics.hpp"
#include "spinres/ensemble.hpp"
#include "spinres/errors.hpp"
#include "spinres/fitkit.hpp"
#include "spinres/fixtures.hpp"
#include "spinres/io.hpp"
#include "spinres/optics.hpp"

namespace {

namespace sr = spinres;
using json = nlohmann::ordered_json;

struct Global {
  std::string config_path;
  std::string out_dir{"."};
  int threads{1};
  bool svg{false};
};

sr::io::RunConfig load_config(const Global& g) {
  if (g.config_path.empty()) return {};
  return sr::io::parse_run_config(sr::io::read_text(g.config_path));
}

std::string opath(const Global& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return (std::filesystem::path(g.out_dir) / name).string();
}

// Sidecar next to every data file: command, its parameters, the fully
// resolved configuration, and the constants-table version.  No paths are
// embedded, so outputs are comparable across directories.
void emit_sidecar(const std::string& file_path, const std::string& command,
                  const json& params, const sr::io::RunConfig& cfg) {
  json side;
  side["command"] = command;
  side["params"] = params;
  side["config"] = json::parse(sr::io::run_config_json(cfg));
  sr::io::write_text(file_path + ".json", side.dump(2) + "\n");
}

sr::atomkit::LevelLabel parse_label(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw sr::invalid_input_error("level label must be 'f,mf' (e.g. 2,2): '" +
                                  s + "'");
  }
  try {
    return sr::atomkit::LevelLabel{std::stod(s.substr(0, comma)),
                                   std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw sr::invalid_input_error("level label must be numeric 'f,mf': '" + s +
                                  "'");
  }
}

std::pair<double, double> parse_pair(const std::string& s,
                                     const std::string& what) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw sr::invalid_input_error(what + " must be 'lo,hi': '" + s + "'");
  }
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw sr::invalid_input_error(what + " must be numeric 'lo,hi': '" + s +
                                  "'");
  }
}

std::size_t column_index(const sr::io::Table& table, const std::string& name,
                         std::size_t fallback) {
  if (name.empty()) {
    if (fallback >= table.columns.size()) {
      throw sr::invalid_input_error("csv has too few columns");
    }
    return fallback;
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (table.columns[i] == name) return i;
  }
  throw sr::invalid_input_error("csv has no column named '" + name + "'");
}

json fit_params_json(const sr::fitkit::FitResult& fit) {
  json arr = json::array();
  for (const auto& par : fit.params) {
    arr.push_back({{"name", par.name},
                   {"value", par.value},
                   {"uncertainty", fit.uncertainty(par.name)},
                   {"fixed", par.fixed}});
  }
  return arr;
}

void write_fit_report(const Global& g, const std::string& name,
                      const std::string& command,
                      const sr::fitkit::FitResult& fit, const json& extra,
                      const sr::io::RunConfig& cfg) {
  json report;
  report["command"] = command;
  report["converged"] = fit.converged;
  report["condition_warning"] = fit.condition_warning;
  report["iterations"] = fit.iterations;
  report["residual_norm"] = fit.residual_norm;
  report["params"] = fit_params_json(fit);
  report["inputs"] = extra;
  report["config"] = json::parse(sr::io::run_config_json(cfg));
  sr::io::write_text(opath(g, name), report.dump(2) + "\n");
}

void print_fit_summary(const sr::fitkit::FitResult& fit) {
  std::printf("converged: %s  iterations: %d  residual_norm: %.6g%s\n",
              fit.converged ? "yes" : "no", fit.iterations, fit.residual_norm,
              fit.condition_warning ? "  [condition warning]" : "");
  for (const auto& par : fit.params) {
    if (par.fixed) {
      std::printf("  %-12s = %.9g (fixed)\n", par.name.c_str(), par.value);
    } else {
      std::printf("  %-12s = %.9g +/- %.3g\n", par.name.c_str(), par.value,
                  fit.uncertainty(par.name));
    }
  }
}

// ---------------------------------------------------------------------------
// atom
// ---------------------------------------------------------------------------

int cmd_atom_levels(const Global& g, double b_min, double b_max, int points,
                    std::optional<double> a_scale) {
  auto cfg = load_config(g);
  if (a_scale) cfg.atom.a_scale = *a_scale;
  if (points < 1) throw sr::invalid_input_error("--points must be >= 1");
  if (b_max < b_min) throw sr::invalid_input_error("--bmax must be >= --bmin");

  const std::string path = opath(g, "atom_levels.csv");
  json params = {{"b_min_gauss", b_min},
                 {"b_max_gauss", b_max},
                 {"points", points},
                 {"a_scale", cfg.atom.a_scale}};

  if (points == 1 || b_max == b_min) {
    // Single-field listing: degenerate energies collapse into one row each.
    const auto spec = sr::atomkit::zeeman_spectrum(cfg.atom, b_min);
    const double tol = 1e-6;
    std::vector<std::vector<double>> rows;
    for (const auto& lvl : spec.levels) {
      if (!rows.empty() && std::abs(lvl.energy_mhz - rows.back()[1]) < tol) {
        rows.back()[2] += 1;
      } else {
        rows.push_back({lvl.label.f, lvl.energy_mhz, 1});
      }
    }
    sr::io::write_csv(path, {"f", "energy_mhz", "degeneracy"}, rows);
    params["mode"] = "single_field";
    emit_sidecar(path, "atom levels", params, cfg);
    if (rows.size() == 2) {
      std::printf("levels at B = %g G: 2 manifolds, splitting %.6f MHz\n",
                  b_min, rows[1][1] - rows[0][1]);
    } else {
      std::printf("levels at B = %g G: %zu rows\n", b_min, rows.size());
    }
    std::printf("wrote %s\n", path.c_str());
    return 0;
  }

  const auto probe = sr::atomkit::zeeman_spectrum(cfg.atom, b_min);
  const std::size_t n_levels = probe.levels.size();
  std::vector<std::string> cols = {"b_gauss"};
  for (std::size_t k = 1; k <= n_levels; ++k) {
    cols.push_back("e_" + std::to_string(k) + "_mhz");
  }
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < points; ++i) {
    const double b = b_min + (b_max - b_min) * i / (points - 1);
    const auto spec = sr::atomkit::zeeman_spectrum(cfg.atom, b);
    std::vector<double> row = {b};
    for (const auto& lvl : spec.levels) row.push_back(lvl.energy_mhz);
    rows.push_back(std::move(row));
  }
  sr::io::write_csv(path, cols, rows);
  params["mode"] = "sweep";
  emit_sidecar(path, "atom levels", params, cfg);
  std::printf("wrote %s (%d field points, %zu levels)\n", path.c_str(), points,
              n_levels);
  return 0;
}

int cmd_atom_field(const Global& g, double target_mhz,
                   std::optional<double> a_scale, const std::string& lower_s,
                   const std::string& upper_s) {
  auto cfg = load_config(g);
  if (a_scale) cfg.atom.a_scale = *a_scale;
  const auto lower = parse_label(lower_s);
  const auto upper = parse_label(upper_s);
  const double b =
      sr::atomkit::field_for_transition(cfg.atom, lower, upper, target_mhz);
  std::printf(
      "resonance field: %.4f G puts the |%g,%g> -> |%g,%g> transition at "
      "%.6f MHz (a_scale %.6g)\n",
      b, lower.f, lower.m_f, upper.f, upper.m_f, target_mhz, cfg.atom.a_scale);
  const std::string path = opath(g, "atom_field.csv");
  sr::io::write_csv(path, {"target_mhz", "b_gauss"}, {{target_mhz, b}});
  emit_sidecar(path, "atom field",
               {{"target_mhz", target_mhz},
                {"lower", lower_s},
                {"upper", upper_s},
                {"a_scale", cfg.atom.a_scale}},
               cfg);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_atom_populations(const Global& g, double temp_mk, double b_gauss,
                         std::optional<double> a_scale) {
  auto cfg = load_config(g);
  if (a_scale) cfg.atom.a_scale = *a_scale;
  const double temp_k = temp_mk * 1e-3;
  const auto spec = sr::atomkit::zeeman_spectrum(cfg.atom, b_gauss);
  const auto p = sr::atomkit::thermal_populations(cfg.atom, b_gauss, temp_k);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < spec.levels.size(); ++i) {
    rows.push_back({spec.levels[i].label.f, spec.levels[i].label.m_f,
                    spec.levels[i].energy_mhz, p[i]});
  }
  const std::string path = opath(g, "atom_populations.csv");
  sr::io::write_csv(path, {"f", "m_f", "energy_mhz", "population"}, rows);
  emit_sidecar(path, "atom populations",
               {{"temp_mk", temp_mk},
                {"b_gauss", b_gauss},
                {"a_scale", cfg.atom.a_scale}},
               cfg);
  const double f_low = cfg.atom.nuclear_spin - 0.5;
  std::printf("T = %g mK, B = %g G\n", temp_mk, b_gauss);
  std::printf("  p(F=%g)  = %.6f\n", f_low,
              sr::atomkit::population_of_f(spec, p, f_low));
  std::printf("  p(F=%g)  = %.6f\n", f_low + 1,
              sr::atomkit::population_of_f(spec, p, f_low + 1));
  std::printf("  p(|%g,%g>) = %.6f\n", f_low, f_low,
              sr::atomkit::population_of(
                  spec, p, sr::atomkit::LevelLabel{f_low, f_low}));
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// sim
// ---------------------------------------------------------------------------

int cmd_sim_s21(const Global& g, std::optional<double> gcoll,
                std::optional<double> f_min, std::optional<double> f_max,
                std::optional<int> points) {
  auto cfg = load_config(g);
  auto model = cfg.ens;
  if (gcoll) model.g_coll_mhz = *gcoll;
  const auto disc =
      sr::ensemble::discretize(model, cfg.n_packets, cfg.span_widths);
  const double lo = f_min.value_or(cfg.sweep.f_min_mhz);
  const double hi = f_max.value_or(cfg.sweep.f_max_mhz);
  const int n = points.value_or(cfg.sweep.n_f);
  if (n < 2 || !(hi > lo)) {
    throw sr::invalid_input_error("sim s21: need fmax > fmin and points >= 2");
  }
  sr::fitkit::Trace trace;
  for (int i = 0; i < n; ++i) {
    const double f = lo + (hi - lo) * i / (n - 1);
    trace.x.push_back(f);
    trace.y.push_back(sr::ensemble::s21_coupled(cfg.resonator, disc, f));
  }
  const std::string path = opath(g, "sim_s21.csv");
  sr::io::write_trace_csv(path, trace);
  emit_sidecar(path, "sim s21",
               {{"g_coll_mhz", model.g_coll_mhz},
                {"f_min_mhz", lo},
                {"f_max_mhz", hi},
                {"points", n}},
               cfg);
  std::printf("wrote %s (%d points)\n", path.c_str(), n);
  if (g.svg) {
    std::vector<double> mag(trace.y.size());
    for (std::size_t i = 0; i < trace.y.size(); ++i) mag[i] = std::abs(trace.y[i]);
    const std::string svg = opath(g, "sim_s21.svg");
    sr::io::write_svg_series(svg, trace.x, mag, "frequency (MHz)", "|S21|",
                             "coupled transmission");
    emit_sidecar(svg, "sim s21", {{"plot", "|S21| vs frequency"}}, cfg);
    std::printf("wrote %s\n", svg.c_str());
  }
  return 0;
}

int cmd_sim_rabi_map(const Global& g) {
  auto cfg = load_config(g);
  sr::ensemble::CrossingMapConfig mcfg;
  mcfg.b_min_gauss = cfg.sweep.b_min_gauss;
  mcfg.b_max_gauss = cfg.sweep.b_max_gauss;
  mcfg.n_b = cfg.sweep.n_b;
  mcfg.f_min_mhz = cfg.sweep.f_min_mhz;
  mcfg.f_max_mhz = cfg.sweep.f_max_mhz;
  mcfg.n_f = cfg.sweep.n_f;
  mcfg.n_packets = cfg.n_packets;
  mcfg.span_widths = cfg.span_widths;
  const auto map = sr::ensemble::avoided_crossing_map(
      cfg.resonator, cfg.ens, cfg.atom, mcfg, g.threads);

  std::vector<std::vector<double>> rows;
  rows.reserve(map.b_gauss.size() * map.f_mhz.size());
  for (std::size_t i = 0; i < map.b_gauss.size(); ++i) {
    for (std::size_t j = 0; j < map.f_mhz.size(); ++j) {
      rows.push_back({map.b_gauss[i], map.f_mhz[j],
                      map.s21_sq[i * map.f_mhz.size() + j]});
    }
  }
  const std::string path = opath(g, "sim_rabi_map.csv");
  sr::io::write_csv(path, {"b_gauss", "freq_mhz", "s21_sq"}, rows);
  emit_sidecar(path, "sim rabi-map", {{"threads", g.threads}}, cfg);

  // Per-row dip separation: distance between the two deepest local minima.
  double best_b = map.b_gauss.empty() ? 0.0 : map.b_gauss[0];
  double best_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < map.b_gauss.size(); ++i) {
    const double* row = &map.s21_sq[i * map.f_mhz.size()];
    std::vector<std::pair<double, double>> minima;  // (value, f)
    for (std::size_t j = 1; j + 1 < map.f_mhz.size(); ++j) {
      if (row[j] < row[j - 1] && row[j] < row[j + 1]) {
        minima.emplace_back(row[j], map.f_mhz[j]);
      }
    }
    if (minima.size() < 2) continue;
    std::sort(minima.begin(), minima.end());
    const double sep = std::abs(minima[1].second - minima[0].second);
    if (sep < best_sep) {
      best_sep = sep;
      best_b = map.b_gauss[i];
    }
  }
  if (std::isfinite(best_sep)) {
    std::printf("smallest dip separation %.6f MHz at B = %.4f G\n", best_sep,
                best_b);
  }
  std::printf("wrote %s (%zu x %zu grid)\n", path.c_str(), map.b_gauss.size(),
              map.f_mhz.size());

  if (g.svg) {
    std::vector<double> f_min_of_b;
    for (std::size_t i = 0; i < map.b_gauss.size(); ++i) {
      const double* row = &map.s21_sq[i * map.f_mhz.size()];
      const std::size_t j =
          std::min_element(row, row + map.f_mhz.size()) - row;
      f_min_of_b.push_back(map.f_mhz[j]);
    }
    const std::string svg = opath(g, "sim_rabi_map.svg");
    sr::io::write_svg_series(svg, map.b_gauss, f_min_of_b, "field (G)",
                             "deepest-dip frequency (MHz)",
                             "avoided crossing (dip ridge)");
    emit_sidecar(svg, "sim rabi-map", {{"plot", "dip ridge"}}, cfg);
    std::printf("wrote %s\n", svg.c_str());
  }
  return 0;
}

int cmd_sim_echo(const Global& g, double tau_us, double t2_ms,
                 const std::string& seq_path, int samples) {
  auto cfg = load_config(g);
  const auto disc =
      sr::ensemble::discretize(cfg.ens, cfg.n_packets, cfg.span_widths);
  sr::dynamics::DecayParams decay;
  decay.t2_hom_ms = t2_ms;
  sr::dynamics::PulseSequence seq;
  if (!seq_path.empty()) {
    seq = sr::io::parse_sequence_json(sr::io::read_text(seq_path));
  } else {
    seq = sr::dynamics::hahn_sequence(tau_us);
  }
  sr::dynamics::RunOptions opts;
  opts.samples_per_delay = samples;
  const auto result = sr::dynamics::run_sequence(disc, seq, decay, opts);

  json params = {{"tau_us", tau_us},
                 {"t2_ms", t2_ms},
                 {"samples_per_delay", samples},
                 {"sequence",
                  seq_path.empty()
                      ? "hahn"
                      : std::filesystem::path(seq_path).filename().string()}};
  const std::string series_path = opath(g, "sim_echo_series.csv");
  {
    std::vector<std::vector<double>> rows;
    for (const auto& pt : result.series) rows.push_back({pt.t_us, pt.re, pt.im});
    sr::io::write_csv(series_path, {"t_us", "re", "im"}, rows);
    emit_sidecar(series_path, "sim echo", params, cfg);
  }
  const std::string echo_path = opath(g, "sim_echo_echoes.csv");
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < result.echoes.size(); ++k) {
      rows.push_back({double(k + 1), result.echoes[k].t_us,
                      result.echoes[k].amplitude});
    }
    sr::io::write_csv(echo_path, {"echo_index", "t_us", "amplitude"}, rows);
    emit_sidecar(echo_path, "sim echo", params, cfg);
  }
  for (const auto& e : result.echoes) {
    std::printf("echo '%s' at t = %.6f us: amplitude %.9f\n", e.tag.c_str(),
                e.t_us, e.amplitude);
  }
  std::printf("wrote %s and %s\n", series_path.c_str(), echo_path.c_str());
  if (g.svg && result.series.size() >= 2) {
    std::vector<double> t, mag;
    for (const auto& pt : result.series) {
      t.push_back(pt.t_us);
      mag.push_back(std::hypot(pt.re, pt.im));
    }
    const std::string svg = opath(g, "sim_echo_series.svg");
    sr::io::write_svg_series(svg, t, mag, "time (us)", "|signal|",
                             "echo sequence");
    emit_sidecar(svg, "sim echo", params, cfg);
    std::printf("wrote %s\n", svg.c_str());
  }
  return 0;
}

int cmd_sim_cpmg(const Global& g, int n_pulses, double tau_us, double t2_ms,
                 double flip_error) {
  auto cfg = load_config(g);
  const auto disc =
      sr::ensemble::discretize(cfg.ens, cfg.n_packets, cfg.span_widths);
  sr::dynamics::DecayParams decay;
  decay.t2_hom_ms = t2_ms;
  const auto echoes =
      sr::dynamics::cpmg(disc, n_pulses, tau_us, decay, flip_error);
  std::vector<std::vector<double>> rows;
  std::vector<double> t_ms, amp;
  for (std::size_t k = 0; k < echoes.size(); ++k) {
    rows.push_back({double(k + 1), echoes[k].t_us, echoes[k].amplitude});
    t_ms.push_back(echoes[k].t_us * 1e-3);
    amp.push_back(echoes[k].amplitude);
  }
  const std::string path = opath(g, "sim_cpmg.csv");
  sr::io::write_csv(path, {"echo_index", "t_us", "amplitude"}, rows);
  emit_sidecar(path, "sim cpmg",
               {{"n", n_pulses},
                {"tau_us", tau_us},
                {"t2_ms", t2_ms},
                {"flip_error", flip_error}},
               cfg);
  std::printf("wrote %s (%zu echoes)\n", path.c_str(), echoes.size());

  bool all_positive = true;
  for (const double a : amp) all_positive = all_positive && a > 0;
  if (amp.size() >= 3 && all_positive) {
    const auto fit =
        sr::fitkit::fit_decay(t_ms, amp, sr::fitkit::DecayForm::exp);
    std::printf("envelope time constant: %.6f ms (converged: %s)\n",
                fit.value("t_const"), fit.converged ? "yes" : "no");
  }
  if (g.svg && rows.size() >= 2) {
    std::vector<double> t_us;
    for (const auto& e : echoes) t_us.push_back(e.t_us);
    const std::string svg = opath(g, "sim_cpmg.svg");
    sr::io::write_svg_series(svg, t_us, amp, "time (us)", "echo amplitude",
                             "CPMG envelope");
    emit_sidecar(svg, "sim cpmg", {{"plot", "envelope"}}, cfg);
    std::printf("wrote %s\n", svg.c_str());
  }
  return 0;
}

int cmd_sim_holeburn(const Global& g, double fwhm_mhz, double detuning_mhz,
                     int points, double span_fwhm) {
  auto cfg = load_config(g);
  // Hole burning reads the dispersive shift, so the ensemble sits detuned
  // from the resonator by --detuning-mhz (storage working point).
  auto model = cfg.ens;
  model.dist.omega_a_mhz = cfg.resonator.omega_c_mhz + detuning_mhz;
  const auto disc =
      sr::ensemble::discretize(model, cfg.n_packets, cfg.span_widths);
  if (points < 8) throw sr::invalid_input_error("sim holeburn: points >= 8");
  std::vector<double> scan(points);
  const double half = 0.5 * span_fwhm * fwhm_mhz;
  for (int i = 0; i < points; ++i) {
    scan[i] =
        model.dist.omega_a_mhz - half + 2.0 * half * i / (points - 1);
  }
  const auto shift = sr::dynamics::hole_burning_scan(cfg.resonator, disc,
                                                     fwhm_mhz, scan);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < points; ++i) rows.push_back({scan[i], shift[i]});
  const std::string path = opath(g, "sim_holeburn.csv");
  sr::io::write_csv(path, {"scan_mhz", "shift_mhz"}, rows);
  emit_sidecar(path, "sim holeburn",
               {{"pulse_fwhm_mhz", fwhm_mhz},
                {"detuning_mhz", detuning_mhz},
                {"points", points},
                {"span_fwhm", span_fwhm}},
               cfg);
  std::printf("wrote %s\n", path.c_str());

  const auto fit = sr::fitkit::fit_gaussian_scan(scan, shift);
  const double fwhm_fit =
      sr::ensemble::gaussian_fwhm_from_sigma(fit.value("sigma"));
  std::printf("gaussian fit: center %.6f MHz, FWHM %.6f MHz (converged: %s)\n",
              fit.value("omega_a"), fwhm_fit, fit.converged ? "yes" : "no");
  if (g.svg) {
    const std::string svg = opath(g, "sim_holeburn.svg");
    sr::io::write_svg_series(svg, scan, shift, "saturation frequency (MHz)",
                             "shift change (MHz)", "hole-burning scan");
    emit_sidecar(svg, "sim holeburn", {{"plot", "profile"}}, cfg);
    std::printf("wrote %s\n", svg.c_str());
  }
  return 0;
}

int cmd_sim_t1(const Global& g, double t1_min, double t_end_min, int points,
               double start_mk, double base_mk, double ramp_min,
               const std::string& form_s, double b_gauss,
               double detuning_mhz) {
  auto cfg = load_config(g);
  sr::dynamics::StretchForm form;
  if (form_s == "stretched") {
    form = sr::dynamics::StretchForm::stretched_sqrt;
  } else if (form_s == "simple") {
    form = sr::dynamics::StretchForm::simple;
  } else {
    throw sr::invalid_input_error("--form must be 'stretched' or 'simple'");
  }
  // Dispersive readout needs the ensemble detuned from the resonator.
  auto model = cfg.ens;
  model.dist.omega_a_mhz = cfg.resonator.omega_c_mhz + detuning_mhz;
  const auto disc =
      sr::ensemble::discretize(model, cfg.n_packets, cfg.span_widths);
  const double ramp = ramp_min > 0 ? ramp_min : 1e-9;
  const std::vector<sr::dynamics::SchedulePoint> schedule = {
      {0.0, start_mk * 1e-3}, {ramp, base_mk * 1e-3}};
  const auto curve = sr::dynamics::t1_repolarization(
      cfg.atom, b_gauss, schedule, t1_min, form, t_end_min, points,
      cfg.resonator, disc);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < curve.t_min.size(); ++i) {
    rows.push_back({curve.t_min[i], curve.temp_k[i], curve.p_f1[i],
                    curve.polarization[i], curve.delta_omega_mhz[i],
                    curve.delta_omega_rel_mhz[i]});
  }
  const std::string path = opath(g, "sim_t1.csv");
  sr::io::write_csv(path,
                    {"t_min", "temp_k", "p_f1", "polarization",
                     "delta_omega_mhz", "delta_omega_rel_mhz"},
                    rows);
  emit_sidecar(path, "sim t1",
               {{"t1_min", t1_min},
                {"t_end_min", t_end_min},
                {"points", points},
                {"start_mk", start_mk},
                {"base_mk", base_mk},
                {"ramp_min", ramp_min},
                {"form", form_s},
                {"b_gauss", b_gauss},
                {"detuning_mhz", detuning_mhz}},
               cfg);
  std::printf("wrote %s (%zu samples)\n", path.c_str(), curve.t_min.size());

  // Recover the time constant from the offset-free column, post-ramp window.
  std::vector<double> t_fit, y_fit;
  for (std::size_t i = 0; i < curve.t_min.size(); ++i) {
    if (curve.t_min[i] >= ramp && curve.delta_omega_rel_mhz[i] > 0) {
      t_fit.push_back(curve.t_min[i]);
      y_fit.push_back(curve.delta_omega_rel_mhz[i]);
    }
  }
  if (t_fit.size() >= 3) {
    const auto fit = sr::fitkit::fit_decay(
        t_fit, y_fit,
        form == sr::dynamics::StretchForm::stretched_sqrt
            ? sr::fitkit::DecayForm::stretched_sqrt
            : sr::fitkit::DecayForm::exp);
    std::printf("repolarization fit: T1 = %.6f min (converged: %s)\n",
                fit.value("t_const"), fit.converged ? "yes" : "no");
  }
  if (g.svg) {
    const std::string svg = opath(g, "sim_t1.svg");
    sr::io::write_svg_series(svg, curve.t_min, curve.delta_omega_mhz,
                             "time (min)", "dispersive shift (MHz)",
                             "repolarization");
    emit_sidecar(svg, "sim t1", {{"plot", "shift vs time"}}, cfg);
    std::printf("wrote %s\n", svg.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

int cmd_fit_resonator(const Global& g, const std::string& in_path) {
  auto cfg = load_config(g);
  const auto trace = sr::io::read_trace_csv(in_path);
  const auto fit = sr::fitkit::fit_resonator(trace);
  print_fit_summary(fit);

  const std::string in_name =
      std::filesystem::path(in_path).filename().string();
  write_fit_report(g, "fit_resonator_report.json", "fit resonator", fit,
                   {{"in", in_name}, {"points", trace.x.size()}}, cfg);

  sr::cavity::ResonatorParams p{
      fit.value("omega_c"), fit.value("kappa_i"), fit.value("kappa_e"),
      fit.value("amp"),     fit.value("alpha"),   fit.value("tau"),
      fit.value("psi")};
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < trace.x.size(); ++i) {
    const auto m = sr::cavity::s21_bare(p, trace.x[i]);
    if (trace.complex_data) {
      rows.push_back({trace.x[i], trace.y[i].real(), trace.y[i].imag(),
                      m.real(), m.imag(), trace.y[i].real() - m.real(),
                      trace.y[i].imag() - m.imag()});
    } else {
      const double data_sq = trace.y[i].real() * trace.y[i].real();
      const double model_sq = std::norm(m);
      rows.push_back({trace.x[i], data_sq, model_sq, data_sq - model_sq});
    }
  }
  const std::string res_path = opath(g, "fit_resonator_residuals.csv");
  if (trace.complex_data) {
    sr::io::write_csv(
        res_path,
        {"freq_mhz", "data_re", "data_im", "model_re", "model_im", "res_re",
         "res_im"},
        rows);
  } else {
    sr::io::write_csv(res_path,
                      {"freq_mhz", "data_magsq", "model_magsq", "residual"},
                      rows);
  }
  emit_sidecar(res_path, "fit resonator", {{"in", in_name}}, cfg);
  std::printf("wrote %s\n", res_path.c_str());
  return fit.converged ? 0 : 1;
}

int cmd_fit_rabi(const Global& g, const std::string& in_path, int n_packets) {
  auto cfg = load_config(g);
  const auto trace = sr::io::read_trace_csv(in_path);
  const auto fit =
      sr::fitkit::fit_rabi(trace, cfg.resonator, n_packets, std::nullopt);
  print_fit_summary(fit);

  const std::string in_name =
      std::filesystem::path(in_path).filename().string();
  write_fit_report(g, "fit_rabi_report.json", "fit rabi", fit,
                   {{"in", in_name}, {"n_packets", n_packets}}, cfg);

  sr::ensemble::EnsembleModel model;
  model.g_coll_mhz = fit.value("g_coll");
  model.gamma_perp_mhz = fit.value("gamma_perp");
  model.dist.sigma_mhz = fit.value("sigma");
  model.dist.omega_a_mhz = fit.value("omega_a");
  const auto disc = sr::ensemble::discretize(model, n_packets, 6.0);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < trace.x.size(); ++i) {
    const auto m = sr::ensemble::s21_coupled(cfg.resonator, disc, trace.x[i]);
    if (trace.complex_data) {
      rows.push_back({trace.x[i], trace.y[i].real(), trace.y[i].imag(),
                      m.real(), m.imag(), trace.y[i].real() - m.real(),
                      trace.y[i].imag() - m.imag()});
    } else {
      const double data_sq = trace.y[i].real() * trace.y[i].real();
      const double model_sq = std::norm(m);
      rows.push_back({trace.x[i], data_sq, model_sq, data_sq - model_sq});
    }
  }
  const std::string res_path = opath(g, "fit_rabi_residuals.csv");
  if (trace.complex_data) {
    sr::io::write_csv(
        res_path,
        {"freq_mhz", "data_re", "data_im", "model_re", "model_im", "res_re",
         "res_im"},
        rows);
  } else {
    sr::io::write_csv(res_path,
                      {"freq_mhz", "data_magsq", "model_magsq", "residual"},
                      rows);
  }
  emit_sidecar(res_path, "fit rabi", {{"in", in_name}}, cfg);
  std::printf("wrote %s\n", res_path.c_str());
  return fit.converged ? 0 : 1;
}

int cmd_fit_gaussian(const Global& g, const std::string& in_path,
                     const std::string& xcol, const std::string& ycol) {
  auto cfg = load_config(g);
  const auto table = sr::io::read_csv(in_path);
  const std::size_t ix = column_index(table, xcol, 0);
  const std::size_t iy = column_index(table, ycol, 1);
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    x.push_back(r[ix]);
    y.push_back(r[iy]);
  }
  const auto fit = sr::fitkit::fit_gaussian_scan(x, y);
  print_fit_summary(fit);
  std::printf("  FWHM         = %.9g\n", sr::ensemble::gaussian_fwhm_from_sigma(
                                             fit.value("sigma")));

  const std::string in_name =
      std::filesystem::path(in_path).filename().string();
  write_fit_report(g, "fit_gaussian_report.json", "fit gaussian", fit,
                   {{"in", in_name}}, cfg);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - fit.value("omega_a");
    const double m =
        fit.value("b") -
        fit.value("a") *
            std::exp(-d * d / (2.0 * fit.value("sigma") * fit.value("sigma")));
    rows.push_back({x[i], y[i], m, y[i] - m});
  }
  const std::string res_path = opath(g, "fit_gaussian_residuals.csv");
  sr::io::write_csv(res_path, {"x", "data", "model", "residual"}, rows);
  emit_sidecar(res_path, "fit gaussian", {{"in", in_name}}, cfg);
  std::printf("wrote %s\n", res_path.c_str());
  return fit.converged ? 0 : 1;
}

int cmd_fit_decay(const Global& g, const std::string& in_path,
                  const std::string& form_s, const std::string& xcol,
                  const std::string& ycol) {
  auto cfg = load_config(g);
  sr::fitkit::DecayForm form;
  if (form_s == "exp") {
    form = sr::fitkit::DecayForm::exp;
  } else if (form_s == "stretched") {
    form = sr::fitkit::DecayForm::stretched_sqrt;
  } else if (form_s == "hahn") {
    form = sr::fitkit::DecayForm::hahn_2tau;
  } else {
    throw sr::invalid_input_error(
        "--form must be 'exp', 'stretched', or 'hahn'");
  }
  const auto table = sr::io::read_csv(in_path);
  const std::size_t ix = column_index(table, xcol, 0);
  const std::size_t iy = column_index(table, ycol, 1);
  std::vector<double> t, y;
  for (const auto& r : table.rows) {
    t.push_back(r[ix]);
    y.push_back(r[iy]);
  }
  const auto fit = sr::fitkit::fit_decay(t, y, form);
  print_fit_summary(fit);

  const std::string in_name =
      std::filesystem::path(in_path).filename().string();
  write_fit_report(g, "fit_decay_report.json", "fit decay", fit,
                   {{"in", in_name}, {"form", form_s}}, cfg);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double e = 0;
    switch (form) {
      case sr::fitkit::DecayForm::exp:
        e = t[i] / fit.value("t_const");
        break;
      case sr::fitkit::DecayForm::hahn_2tau:
        e = 2.0 * t[i] / fit.value("t_const");
        break;
      case sr::fitkit::DecayForm::stretched_sqrt:
        e = std::sqrt(t[i] / fit.value("t_const"));
        break;
    }
    const double m = fit.value("a0") * std::exp(-e);
    rows.push_back({t[i], y[i], m, y[i] - m});
  }
  const std::string res_path = opath(g, "fit_decay_residuals.csv");
  sr::io::write_csv(res_path, {"t", "data", "model", "residual"}, rows);
  emit_sidecar(res_path, "fit decay", {{"in", in_name}, {"form", form_s}},
               cfg);
  std::printf("wrote %s\n", res_path.c_str());
  return fit.converged ? 0 : 1;
}

// ---------------------------------------------------------------------------
// od
// ---------------------------------------------------------------------------

sr::optics::OdSpectrum read_od_csv(const std::string& path) {
  const auto table = sr::io::read_csv(path);
  if (table.columns.size() < 2) {
    throw sr::invalid_input_error(path + ": need columns wavelength_nm,od");
  }
  sr::optics::OdSpectrum spec;
  for (const auto& r : table.rows) {
    spec.samples.push_back({r[0], r[1]});
  }
  return spec;
}

int cmd_od_normalize(const Global& g, const std::string& in_path,
                     const std::string& anchors_s) {
  auto cfg = load_config(g);
  const auto [a_lo, a_hi] = parse_pair(anchors_s, "--anchors");
  const auto raw = read_od_csv(in_path);
  const auto out = sr::optics::normalize_od(raw, a_lo, a_hi);
  std::vector<std::vector<double>> rows;
  for (const auto& s : out.samples) rows.push_back({s.wavelength_nm, s.od});
  const std::string path = opath(g, "od_normalize.csv");
  sr::io::write_csv(path, {"wavelength_nm", "od"}, rows);
  const std::string in_name =
      std::filesystem::path(in_path).filename().string();
  emit_sidecar(path, "od normalize",
               {{"in", in_name}, {"anchor_lo_nm", a_lo}, {"anchor_hi_nm", a_hi}},
               cfg);
  std::printf("wrote %s (anchors %.6g, %.6g nm)\n", path.c_str(), a_lo, a_hi);
  if (g.svg) {
    std::vector<double> wl, od;
    for (const auto& s : out.samples) {
      wl.push_back(s.wavelength_nm);
      od.push_back(s.od);
    }
    const std::string svg = opath(g, "od_normalize.svg");
    sr::io::write_svg_series(svg, wl, od, "wavelength (nm)", "OD",
                             "normalized optical depth");
    emit_sidecar(svg, "od normalize", {{"plot", "OD"}}, cfg);
    std::printf("wrote %s\n", svg.c_str());
  }
  return 0;
}

int cmd_od_density(const Global& g, std::optional<double> integrated,
                   const std::string& in_path, const std::string& band_s,
                   double oscillator_strength, double path_um,
                   double lambda_nm) {
  auto cfg = load_config(g);
  double integral = 0;
  json inputs;
  if (!in_path.empty()) {
    if (band_s.empty()) {
      throw sr::invalid_input_error("od density: --band lo,hi required with --in");
    }
    const auto [b_lo, b_hi] = parse_pair(band_s, "--band");
    const auto spec = read_od_csv(in_path);
    integral = sr::optics::integrate_od(spec, b_lo, b_hi);
    inputs["in"] = std::filesystem::path(in_path).filename().string();
    inputs["band_lo_nm"] = b_lo;
    inputs["band_hi_nm"] = b_hi;
  } else if (integrated) {
    integral = *integrated;
  } else {
    throw sr::invalid_input_error(
        "od density: give --integrated-od or --in with --band");
  }
  const double density = sr::optics::estimate_density(
      integral, oscillator_strength, path_um, lambda_nm);
  const double reference = sr::fixtures::reference_values().density_cm3;
  const double log_dist = std::abs(std::log10(density / reference));
  std::printf("integrated OD: %.6g nm\n", integral);
  std::printf("density estimate: %.6g cm^-3\n", density);
  std::printf(
      "[flagged] reference scale %.1e cm^-3: log10 distance %.2f — within "
      "one order of magnitude: %s (reported, not asserted)\n",
      reference, log_dist, log_dist <= 1.0 ? "yes" : "no");

  inputs["integrated_od_nm"] = integral;
  inputs["oscillator_strength"] = oscillator_strength;
  inputs["path_length_um"] = path_um;
  inputs["lambda_center_nm"] = lambda_nm;
  json report;
  report["command"] = "od density";
  report["inputs"] = inputs;
  report["density_cm3"] = density;
  report["reference_density_cm3"] = reference;
  report["log10_distance"] = log_dist;
  report["config"] = json::parse(sr::io::run_config_json(cfg));
  const std::string path = opath(g, "od_density.json");
  sr::io::write_text(path, report.dump(2) + "\n");
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

sr::io::RunConfig config_for_fixture(const sr::fixtures::CoupledFixture& fx) {
  sr::io::RunConfig cfg;
  cfg.atom.a_scale = fx.a_scale;
  cfg.resonator = fx.resonator;
  cfg.ens = fx.ensemble;
  return cfg;
}

int cmd_fixtures(const Global& g) {
  sr::io::RunConfig base_cfg;  // defaults; echoed in the report sidecar

  json written = json::array();
  for (const auto& fx : sr::fixtures::coupled_fixtures()) {
    const std::string path = opath(g, "fixtures_" + fx.name + ".json");
    sr::io::write_text(path, sr::io::run_config_json(config_for_fixture(fx)));
    written.push_back("fixtures_" + fx.name + ".json");
    std::printf("wrote %s\n", path.c_str());
  }
  {
    sr::io::RunConfig cfg;
    cfg.resonator = sr::fixtures::resonator_before_growth();
    cfg.ens.g_coll_mhz = 0.0;
    const std::string path = opath(g, "fixtures_resonator_before.json");
    sr::io::write_text(path, sr::io::run_config_json(cfg));
    written.push_back("fixtures_resonator_before.json");
    std::printf("wrote %s\n", path.c_str());
  }
  {
    sr::io::RunConfig cfg;
    cfg.resonator = sr::fixtures::resonator_after_growth();
    cfg.ens.g_coll_mhz = 0.0;
    const std::string path = opath(g, "fixtures_resonator_after.json");
    sr::io::write_text(path, sr::io::run_config_json(cfg));
    written.push_back("fixtures_resonator_after.json");
    std::printf("wrote %s\n", path.c_str());
  }

  // Flagged comparisons: computed from the fixture inputs and printed next
  // to the carried reference values.  Reported, never asserted.
  const auto fx = sr::fixtures::asgrown();
  const auto ref = sr::fixtures::reference_values();
  const auto lw = sr::fixtures::linewidth_fixture();
  const auto single = sr::fixtures::single_spin_fixture();
  const auto disc = sr::ensemble::discretize(fx.ensemble, 2001, 6.0);
  const double gamma_eff = sr::ensemble::effective_linewidth(disc);
  const double kappa =
      fx.resonator.kappa_e_mhz + fx.resonator.kappa_i_mhz;
  const double coop = sr::ensemble::cooperativity(fx.ensemble.g_coll_mhz,
                                                  kappa, gamma_eff);
  const double dipolar_mhz = sr::ensemble::dipolar_fwhm_mhz(
      ref.density_cm3, sr::constants::kDipoleCouplingElectronElectron, false);
  // Band integral for a gaussian peak of height 1.5 and FWHM 20 nm.
  const double integral_nm =
      1.5 * 20.0 * 0.5 * std::sqrt(std::numbers::pi / std::numbers::ln2);
  const double density = sr::optics::estimate_density(
      integral_nm, ref.oscillator_strength, ref.path_length_um,
      ref.lambda_center_nm);
  const double purcell_on = sr::ensemble::purcell_rate(
      single.g0_mhz, kappa, 0.0);
  const double purcell_off = sr::ensemble::purcell_rate(
      single.g0_mhz, kappa, single.delta_mhz);

  std::printf(
      "[flagged] cooperativity: computed C = %.4f from (g, kappa, Gamma) = "
      "(%.3f, %.3f, %.4f) MHz; carried reference %.1f disagrees with these "
      "inputs (reported, not asserted)\n",
      coop, fx.ensemble.g_coll_mhz, kappa, gamma_eff, ref.cooperativity);
  std::printf(
      "[flagged] like-spin dipolar broadening at %.1e cm^-3: computed %.4g "
      "kHz; carried reference %.0f kHz (reported, not asserted)\n",
      ref.density_cm3, dipolar_mhz * 1e3, ref.dipolar_fwhm_hz * 1e-3);
  std::printf(
      "[flagged] density from a %.4g nm band integral (f = %.2f, path = %.0f "
      "um): computed %.3g cm^-3 vs reference %.1e cm^-3 (reported, not "
      "asserted)\n",
      integral_nm, ref.oscillator_strength, ref.path_length_um, density,
      ref.density_cm3);
  std::printf(
      "[info] radiative-decay suppression at %.0f MHz detuning: %.4g\n",
      single.delta_mhz, purcell_off / purcell_on);

  json report;
  report["command"] = "fixtures";
  report["written"] = written;
  report["computed"] = {
      {"gamma_eff_mhz", gamma_eff},
      {"cooperativity", coop},
      {"reference_cooperativity", ref.cooperativity},
      {"dipolar_fwhm_khz", dipolar_mhz * 1e3},
      {"reference_dipolar_fwhm_khz", ref.dipolar_fwhm_hz * 1e-3},
      {"band_integral_nm", integral_nm},
      {"density_cm3", density},
      {"reference_density_cm3", ref.density_cm3},
      {"purcell_suppression", purcell_off / purcell_on},
      {"t2_hahn_ms", sr::fixtures::decay_fixture().t2_hahn_ms},
      {"t2_cpmg_ms", sr::fixtures::decay_fixture().t2_cpmg_ms},
      {"t1_min", sr::fixtures::decay_fixture().t1_min}};
  report["config"] = json::parse(sr::io::run_config_json(base_cfg));
  const std::string path = opath(g, "fixtures_report.json");
  sr::io::write_text(path, report.dump(2) + "\n");
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinres — spin-ensemble notch-resonator simulator and fitter"};
  app.require_subcommand(1);

  Global g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--out", g.out_dir, "output directory (default '.')");
  app.add_option("--threads", g.threads, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);
  app.add_flag("--svg", g.svg, "also write SVG quick-look plots");

  int rc = 0;

  // ---- atom ----
  auto* atom = app.add_subcommand("atom", "hyperfine level toolbox");
  atom->require_subcommand(1);
  atom->fallthrough();
  {
    auto* sub = atom->add_subcommand("levels", "level energies vs field");
    auto bmin = std::make_shared<double>(0.0);
    auto bmax = std::make_shared<double>(1000.0);
    auto points = std::make_shared<int>(201);
    auto ascale = std::make_shared<double>();
    auto* asopt = sub->add_option("--ascale", *ascale, "hyperfine scale");
    sub->add_option("--bmin", *bmin, "start field (G)");
    sub->add_option("--bmax", *bmax, "end field (G)");
    sub->add_option("--points", *points, "field points");
    sub->fallthrough();
    sub->callback([&rc, &g, bmin, bmax, points, ascale, asopt]() {
      rc = cmd_atom_levels(g, *bmin, *bmax, *points,
                           asopt->count() ? std::optional<double>(*ascale)
                                          : std::nullopt);
    });
  }
  {
    auto* sub = atom->add_subcommand("field", "field for a target transition");
    auto target = std::make_shared<double>(3713.7);
    auto ascale = std::make_shared<double>();
    auto lower = std::make_shared<std::string>("1,1");
    auto upper = std::make_shared<std::string>("2,2");
    sub->add_option("--target-mhz", *target, "transition frequency (MHz)");
    auto* asopt = sub->add_option("--ascale", *ascale, "hyperfine scale");
    sub->add_option("--lower", *lower, "lower level 'f,mf'");
    sub->add_option("--upper", *upper, "upper level 'f,mf'");
    sub->fallthrough();
    sub->callback([&rc, &g, target, ascale, asopt, lower, upper]() {
      rc = cmd_atom_field(g, *target,
                          asopt->count() ? std::optional<double>(*ascale)
                                         : std::nullopt,
                          *lower, *upper);
    });
  }
  {
    auto* sub = atom->add_subcommand("populations", "thermal populations");
    auto temp = std::make_shared<double>(50.0);
    auto b = std::make_shared<double>(776.95);
    auto ascale = std::make_shared<double>();
    sub->add_option("--temp-mk", *temp, "temperature (mK)");
    sub->add_option("--b-gauss", *b, "magnetic field (G)");
    auto* asopt = sub->add_option("--ascale", *ascale, "hyperfine scale");
    sub->fallthrough();
    sub->callback([&rc, &g, temp, b, ascale, asopt]() {
      rc = cmd_atom_populations(g, *temp, *b,
                                asopt->count() ? std::optional<double>(*ascale)
                                               : std::nullopt);
    });
  }

  // ---- sim ----
  auto* sim = app.add_subcommand("sim", "simulations");
  sim->require_subcommand(1);
  sim->fallthrough();
  {
    auto* sub = sim->add_subcommand("s21", "coupled transmission sweep");
    auto gcoll = std::make_shared<double>();
    auto fmin = std::make_shared<double>();
    auto fmax = std::make_shared<double>();
    auto points = std::make_shared<int>();
    auto* gopt = sub->add_option("--gcoll", *gcoll, "collective coupling (MHz)");
    auto* fminopt = sub->add_option("--fmin", *fmin, "sweep start (MHz)");
    auto* fmaxopt = sub->add_option("--fmax", *fmax, "sweep end (MHz)");
    auto* popt = sub->add_option("--points", *points, "sweep points");
    sub->fallthrough();
    sub->callback([&rc, &g, gcoll, gopt, fmin, fminopt, fmax, fmaxopt, points,
                   popt]() {
      rc = cmd_sim_s21(
          g, gopt->count() ? std::optional<double>(*gcoll) : std::nullopt,
          fminopt->count() ? std::optional<double>(*fmin) : std::nullopt,
          fmaxopt->count() ? std::optional<double>(*fmax) : std::nullopt,
          popt->count() ? std::optional<int>(*points) : std::nullopt);
    });
  }
  {
    auto* sub = sim->add_subcommand("rabi-map", "avoided-crossing map");
    sub->fallthrough();
    sub->callback([&rc, &g]() { rc = cmd_sim_rabi_map(g); });
  }
  {
    auto* sub = sim->add_subcommand("echo", "pulse sequence on the ensemble");
    auto tau = std::make_shared<double>(100.0);
    auto t2 = std::make_shared<double>(0.92);
    auto seq = std::make_shared<std::string>();
    auto samples = std::make_shared<int>(200);
    sub->add_option("--tau-us", *tau, "half-delay (us)");
    sub->add_option("--t2-ms", *t2, "homogeneous T2 (ms)");
    sub->add_option("--sequence", *seq, "sequence JSON file (default Hahn)");
    sub->add_option("--samples", *samples, "series samples per delay");
    sub->fallthrough();
    sub->callback([&rc, &g, tau, t2, seq, samples]() {
      rc = cmd_sim_echo(g, *tau, *t2, *seq, *samples);
    });
  }
  {
    auto* sub = sim->add_subcommand("cpmg", "CPMG echo train");
    auto n = std::make_shared<int>(25);
    auto tau = std::make_shared<double>(100.0);
    auto t2 = std::make_shared<double>(1.38);
    auto flip = std::make_shared<double>(0.0);
    sub->add_option("--n", *n, "number of pi pulses");
    sub->add_option("--tau-us", *tau, "half-period (us)");
    sub->add_option("--t2-ms", *t2, "homogeneous T2 (ms)");
    sub->add_option("--flip-error", *flip, "fractional pi-pulse angle error");
    sub->fallthrough();
    sub->callback([&rc, &g, n, tau, t2, flip]() {
      rc = cmd_sim_cpmg(g, *n, *tau, *t2, *flip);
    });
  }
  {
    auto* sub = sim->add_subcommand("holeburn", "saturation scan of the line");
    auto fwhm = std::make_shared<double>(0.2);
    auto detuning = std::make_shared<double>(28.0);
    auto points = std::make_shared<int>(201);
    auto span = std::make_shared<double>(6.0);
    sub->add_option("--fwhm-mhz", *fwhm, "saturation pulse FWHM (MHz)");
    sub->add_option("--detuning-mhz", *detuning,
                    "ensemble-resonator detuning (MHz)");
    sub->add_option("--points", *points, "scan points");
    sub->add_option("--span-fwhm", *span, "scan span in pulse FWHMs");
    sub->fallthrough();
    sub->callback([&rc, &g, fwhm, detuning, points, span]() {
      rc = cmd_sim_holeburn(g, *fwhm, *detuning, *points, *span);
    });
  }
  {
    auto* sub = sim->add_subcommand("t1", "repolarization under a temperature ramp");
    auto t1 = std::make_shared<double>(8.23);
    auto tend = std::make_shared<double>(60.0);
    auto points = std::make_shared<int>(601);
    auto start = std::make_shared<double>(500.0);
    auto base = std::make_shared<double>(50.0);
    auto ramp = std::make_shared<double>(4.5);
    auto form = std::make_shared<std::string>("stretched");
    auto b = std::make_shared<double>(776.95);
    auto det = std::make_shared<double>(28.0);
    sub->add_option("--t1-min", *t1, "relaxation time (min)");
    sub->add_option("--t-end-min", *tend, "simulated span (min)");
    sub->add_option("--points", *points, "output samples");
    sub->add_option("--start-mk", *start, "initial temperature (mK)");
    sub->add_option("--base-mk", *base, "final temperature (mK)");
    sub->add_option("--ramp-min", *ramp, "cooldown ramp duration (min, 0 = step)");
    sub->add_option("--form", *form, "decay form: stretched | simple");
    sub->add_option("--b-gauss", *b, "magnetic field (G)");
    sub->add_option("--detuning-mhz", *det, "readout detuning (MHz)");
    sub->fallthrough();
    sub->callback([&rc, &g, t1, tend, points, start, base, ramp, form, b,
                   det]() {
      rc = cmd_sim_t1(g, *t1, *tend, *points, *start, *base, *ramp, *form, *b,
                      *det);
    });
  }

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "least-squares fits");
  fit->require_subcommand(1);
  fit->fallthrough();
  {
    auto* sub = fit->add_subcommand("resonator", "bare notch fit");
    auto in = std::make_shared<std::string>();
    sub->add_option("--in", *in, "trace CSV")->required();
    sub->fallthrough();
    sub->callback([&rc, &g, in]() { rc = cmd_fit_resonator(g, *in); });
  }
  {
    auto* sub = fit->add_subcommand("rabi", "coupled-spectrum fit");
    auto in = std::make_shared<std::string>();
    auto np = std::make_shared<int>(2001);
    sub->add_option("--in", *in, "trace CSV")->required();
    sub->add_option("--npackets", *np, "spectral packets for the model");
    sub->fallthrough();
    sub->callback([&rc, &g, in, np]() { rc = cmd_fit_rabi(g, *in, *np); });
  }
  {
    auto* sub = fit->add_subcommand("gaussian", "gaussian dip/peak fit");
    auto in = std::make_shared<std::string>();
    auto xcol = std::make_shared<std::string>();
    auto ycol = std::make_shared<std::string>();
    sub->add_option("--in", *in, "scan CSV")->required();
    sub->add_option("--xcol", *xcol, "x column name (default first)");
    sub->add_option("--ycol", *ycol, "y column name (default second)");
    sub->fallthrough();
    sub->callback([&rc, &g, in, xcol, ycol]() {
      rc = cmd_fit_gaussian(g, *in, *xcol, *ycol);
    });
  }
  {
    auto* sub = fit->add_subcommand("decay", "exponential-family decay fit");
    auto in = std::make_shared<std::string>();
    auto form = std::make_shared<std::string>("exp");
    auto xcol = std::make_shared<std::string>();
    auto ycol = std::make_shared<std::string>();
    sub->add_option("--in", *in, "decay CSV")->required();
    sub->add_option("--form", *form, "exp | stretched | hahn");
    sub->add_option("--xcol", *xcol, "time column name (default first)");
    sub->add_option("--ycol", *ycol, "amplitude column name (default second)");
    sub->fallthrough();
    sub->callback([&rc, &g, in, form, xcol, ycol]() {
      rc = cmd_fit_decay(g, *in, *form, *xcol, *ycol);
    });
  }

  // ---- od ----
  auto* od = app.add_subcommand("od", "optical depth tools");
  od->require_subcommand(1);
  od->fallthrough();
  {
    auto* sub = od->add_subcommand("normalize", "baseline normalization");
    auto in = std::make_shared<std::string>();
    auto anchors = std::make_shared<std::string>("450,800");
    sub->add_option("--in", *in, "spectrum CSV (wavelength_nm,od)")->required();
    sub->add_option("--anchors", *anchors, "anchor wavelengths 'lo,hi' (nm)");
    sub->fallthrough();
    sub->callback([&rc, &g, in, anchors]() {
      rc = cmd_od_normalize(g, *in, *anchors);
    });
  }
  {
    auto* sub = od->add_subcommand("density", "number-density estimate");
    auto integrated = std::make_shared<double>();
    auto in = std::make_shared<std::string>();
    auto band = std::make_shared<std::string>();
    auto f = std::make_shared<double>(0.98);
    auto path_um = std::make_shared<double>(17.0);
    auto lambda = std::make_shared<double>(586.0);
    auto* iopt =
        sub->add_option("--integrated-od", *integrated, "band integral (nm*OD)");
    sub->add_option("--in", *in, "spectrum CSV to integrate");
    sub->add_option("--band", *band, "integration band 'lo,hi' (nm)");
    sub->add_option("--oscillator-strength", *f, "oscillator strength");
    sub->add_option("--path-um", *path_um, "optical path length (um)");
    sub->add_option("--lambda-nm", *lambda, "band-center wavelength (nm)");
    sub->fallthrough();
    sub->callback([&rc, &g, integrated, iopt, in, band, f, path_um, lambda]() {
      rc = cmd_od_density(
          g, iopt->count() ? std::optional<double>(*integrated) : std::nullopt,
          *in, *band, *f, *path_um, *lambda);
    });
  }

  // ---- fixtures ----
  {
    auto* sub = app.add_subcommand(
        "fixtures", "write canonical parameter sets + flagged comparisons");
    sub->fallthrough();
    sub->callback([&rc, &g]() { rc = cmd_fixtures(g); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const sr::invalid_input_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const sr::no_solution_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const sr::precondition_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return rc;
}
