#include "spinres/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "spinres/constants.hpp"
#include "spinres/errors.hpp"

namespace spinres::io {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_number(const std::string& s, const std::string& path,
                    std::size_t row) {
  const std::string t = trim(s);
  if (t.empty()) {
    throw invalid_input_error(path + ": empty field at row " +
                              std::to_string(row));
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw invalid_input_error(path + ": bad number '" + t + "' at row " +
                              std::to_string(row));
  }
  return v;
}

}  // namespace

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return buf;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input_error(path + ": cannot open file");
  Table table;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!have_header) {
      table.columns = split_csv_line(t);
      have_header = true;
      continue;
    }
    const auto fields = split_csv_line(t);
    if (fields.size() != table.columns.size()) {
      throw invalid_input_error(
          path + ": expected " + std::to_string(table.columns.size()) +
          " fields but got " + std::to_string(fields.size()) + " at row " +
          std::to_string(row));
    }
    std::vector<double> vals;
    vals.reserve(fields.size());
    for (const auto& f : fields) vals.push_back(parse_number(f, path, row));
    table.rows.push_back(std::move(vals));
  }
  if (!have_header || table.rows.empty()) {
    throw invalid_input_error(path + ": no data rows");
  }
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& comments) {
  if (columns.empty()) throw invalid_input_error("write_csv: no columns");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input_error(path + ": cannot open for writing");
  for (const auto& c : comments) out << "# " << c << "\n";
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out << (j ? "," : "") << columns[j];
  }
  out << "\n";
  for (const auto& r : rows) {
    if (r.size() != columns.size()) {
      throw invalid_input_error("write_csv: row width mismatch");
    }
    for (std::size_t j = 0; j < r.size(); ++j) {
      out << (j ? "," : "") << format_float(r[j]);
    }
    out << "\n";
  }
  if (!out) throw invalid_input_error(path + ": write failed");
}

fitkit::Trace read_trace_csv(const std::string& path) {
  const Table table = read_csv(path);
  fitkit::Trace trace;
  const auto& c = table.columns;
  const bool rect = c == std::vector<std::string>{"freq_mhz", "re", "im"};
  const bool polar =
      c == std::vector<std::string>{"freq_mhz", "mag_db", "phase_deg"};
  const bool mag_only = c == std::vector<std::string>{"freq_mhz", "mag"};
  if (!rect && !polar && !mag_only) {
    throw invalid_input_error(
        path +
        ": unrecognized trace header (want freq_mhz,re,im or "
        "freq_mhz,mag_db,phase_deg or freq_mhz,mag)");
  }
  trace.complex_data = !mag_only;
  for (const auto& r : table.rows) {
    trace.x.push_back(r[0]);
    if (rect) {
      trace.y.emplace_back(r[1], r[2]);
    } else if (polar) {
      const double mag = std::pow(10.0, r[1] / 20.0);
      const double ph = r[2] * std::numbers::pi / 180.0;
      trace.y.push_back(std::polar(mag, ph));
    } else {
      trace.y.emplace_back(r[1], 0.0);
    }
  }
  return trace;
}

void write_trace_csv(const std::string& path, const fitkit::Trace& trace,
                     const std::vector<std::string>& comments) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.x.size());
  if (trace.complex_data) {
    for (std::size_t i = 0; i < trace.x.size(); ++i) {
      rows.push_back({trace.x[i], trace.y[i].real(), trace.y[i].imag()});
    }
    write_csv(path, {"freq_mhz", "re", "im"}, rows, comments);
  } else {
    for (std::size_t i = 0; i < trace.x.size(); ++i) {
      rows.push_back({trace.x[i], trace.y[i].real()});
    }
    write_csv(path, {"freq_mhz", "mag"}, rows, comments);
  }
}

// ---------------------------------------------------------------------------
// Strict JSON configuration
// ---------------------------------------------------------------------------

namespace {

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw invalid_input_error("config: unknown key '" +
                                (prefix.empty() ? "" : prefix + ".") +
                                item.key() + "'");
    }
  }
}

std::string key_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

double get_num(const json& obj, const std::string& prefix,
               const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw invalid_input_error("config: key '" + key_path(prefix, key) +
                              "' must be a number");
  }
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& prefix, const std::string& key,
            int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw invalid_input_error("config: key '" + key_path(prefix, key) +
                              "' must be an integer");
  }
  return obj[key].get<int>();
}

std::string get_str(const json& obj, const std::string& prefix,
                    const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) {
    throw invalid_input_error("config: key '" + key_path(prefix, key) +
                              "' must be a string");
  }
  return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const std::string& prefix,
              const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) {
    throw invalid_input_error("config: key '" + key_path(prefix, key) +
                              "' must be a boolean");
  }
  return obj[key].get<bool>();
}

json get_obj(const json& obj, const std::string& key) {
  if (!obj.contains(key)) return json::object();
  if (!obj[key].is_object()) {
    throw invalid_input_error("config: key '" + key + "' must be an object");
  }
  return obj[key];
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw invalid_input_error(std::string("config: ") + e.what());
  }
  if (!root.is_object()) {
    throw invalid_input_error("config: top level must be a JSON object");
  }
  // "constants_version" is accepted so emitted configs round-trip as inputs.
  check_keys(root, "",
             {"atom", "resonator", "ensemble", "sweep", "output",
              "constants_version"});

  RunConfig cfg;

  const json atom = get_obj(root, "atom");
  check_keys(atom, "atom", {"nuclear_spin", "a_hfs_mhz", "a_scale", "g_j", "g_i"});
  cfg.atom.nuclear_spin = get_num(atom, "atom", "nuclear_spin", cfg.atom.nuclear_spin);
  cfg.atom.a_hfs_mhz = get_num(atom, "atom", "a_hfs_mhz", cfg.atom.a_hfs_mhz);
  cfg.atom.a_scale = get_num(atom, "atom", "a_scale", cfg.atom.a_scale);
  cfg.atom.g_j = get_num(atom, "atom", "g_j", cfg.atom.g_j);
  cfg.atom.g_i = get_num(atom, "atom", "g_i", cfg.atom.g_i);

  const json res = get_obj(root, "resonator");
  check_keys(res, "resonator",
             {"omega_c_mhz", "kappa_i_mhz", "kappa_e_mhz", "amp", "alpha_rad",
              "tau_us", "psi_rad"});
  cfg.resonator.omega_c_mhz = get_num(res, "resonator", "omega_c_mhz", cfg.resonator.omega_c_mhz);
  cfg.resonator.kappa_i_mhz = get_num(res, "resonator", "kappa_i_mhz", cfg.resonator.kappa_i_mhz);
  cfg.resonator.kappa_e_mhz = get_num(res, "resonator", "kappa_e_mhz", cfg.resonator.kappa_e_mhz);
  cfg.resonator.amp = get_num(res, "resonator", "amp", cfg.resonator.amp);
  cfg.resonator.alpha_rad = get_num(res, "resonator", "alpha_rad", cfg.resonator.alpha_rad);
  cfg.resonator.tau_us = get_num(res, "resonator", "tau_us", cfg.resonator.tau_us);
  cfg.resonator.psi_rad = get_num(res, "resonator", "psi_rad", cfg.resonator.psi_rad);

  const json ens = get_obj(root, "ensemble");
  check_keys(ens, "ensemble",
             {"omega_a_mhz", "sigma_mhz", "shape", "amp_a", "offset_b",
              "g_coll_mhz", "gamma_perp_mhz", "n_packets", "span_widths"});
  cfg.ens.dist.omega_a_mhz = get_num(ens, "ensemble", "omega_a_mhz", cfg.ens.dist.omega_a_mhz);
  cfg.ens.dist.sigma_mhz = get_num(ens, "ensemble", "sigma_mhz", cfg.ens.dist.sigma_mhz);
  const std::string shape = get_str(ens, "ensemble", "shape", "gaussian");
  if (shape == "gaussian") {
    cfg.ens.dist.shape = ensemble::LineShape::gaussian;
  } else if (shape == "lorentzian") {
    cfg.ens.dist.shape = ensemble::LineShape::lorentzian;
  } else {
    throw invalid_input_error(
        "config: key 'ensemble.shape' must be \"gaussian\" or \"lorentzian\"");
  }
  cfg.ens.dist.amp_a = get_num(ens, "ensemble", "amp_a", cfg.ens.dist.amp_a);
  cfg.ens.dist.offset_b = get_num(ens, "ensemble", "offset_b", cfg.ens.dist.offset_b);
  cfg.ens.g_coll_mhz = get_num(ens, "ensemble", "g_coll_mhz", cfg.ens.g_coll_mhz);
  cfg.ens.gamma_perp_mhz = get_num(ens, "ensemble", "gamma_perp_mhz", cfg.ens.gamma_perp_mhz);
  cfg.n_packets = get_int(ens, "ensemble", "n_packets", cfg.n_packets);
  cfg.span_widths = get_num(ens, "ensemble", "span_widths", cfg.span_widths);

  const json sweep = get_obj(root, "sweep");
  check_keys(sweep, "sweep",
             {"b_min_gauss", "b_max_gauss", "n_b", "f_min_mhz", "f_max_mhz", "n_f"});
  cfg.sweep.b_min_gauss = get_num(sweep, "sweep", "b_min_gauss", cfg.sweep.b_min_gauss);
  cfg.sweep.b_max_gauss = get_num(sweep, "sweep", "b_max_gauss", cfg.sweep.b_max_gauss);
  cfg.sweep.n_b = get_int(sweep, "sweep", "n_b", cfg.sweep.n_b);
  cfg.sweep.f_min_mhz = get_num(sweep, "sweep", "f_min_mhz", cfg.sweep.f_min_mhz);
  cfg.sweep.f_max_mhz = get_num(sweep, "sweep", "f_max_mhz", cfg.sweep.f_max_mhz);
  cfg.sweep.n_f = get_int(sweep, "sweep", "n_f", cfg.sweep.n_f);

  const json output = get_obj(root, "output");
  check_keys(output, "output", {"dir", "svg"});
  cfg.output.dir = get_str(output, "output", "dir", cfg.output.dir);
  cfg.output.svg = get_bool(output, "output", "svg", cfg.output.svg);

  return cfg;
}

std::string run_config_json(const RunConfig& cfg) {
  json root;
  root["atom"] = {{"nuclear_spin", cfg.atom.nuclear_spin},
                  {"a_hfs_mhz", cfg.atom.a_hfs_mhz},
                  {"a_scale", cfg.atom.a_scale},
                  {"g_j", cfg.atom.g_j},
                  {"g_i", cfg.atom.g_i}};
  root["resonator"] = {{"omega_c_mhz", cfg.resonator.omega_c_mhz},
                       {"kappa_i_mhz", cfg.resonator.kappa_i_mhz},
                       {"kappa_e_mhz", cfg.resonator.kappa_e_mhz},
                       {"amp", cfg.resonator.amp},
                       {"alpha_rad", cfg.resonator.alpha_rad},
                       {"tau_us", cfg.resonator.tau_us},
                       {"psi_rad", cfg.resonator.psi_rad}};
  root["ensemble"] = {
      {"omega_a_mhz", cfg.ens.dist.omega_a_mhz},
      {"sigma_mhz", cfg.ens.dist.sigma_mhz},
      {"shape",
       cfg.ens.dist.shape == ensemble::LineShape::gaussian ? "gaussian"
                                                           : "lorentzian"},
      {"amp_a", cfg.ens.dist.amp_a},
      {"offset_b", cfg.ens.dist.offset_b},
      {"g_coll_mhz", cfg.ens.g_coll_mhz},
      {"gamma_perp_mhz", cfg.ens.gamma_perp_mhz},
      {"n_packets", cfg.n_packets},
      {"span_widths", cfg.span_widths}};
  root["sweep"] = {{"b_min_gauss", cfg.sweep.b_min_gauss},
                   {"b_max_gauss", cfg.sweep.b_max_gauss},
                   {"n_b", cfg.sweep.n_b},
                   {"f_min_mhz", cfg.sweep.f_min_mhz},
                   {"f_max_mhz", cfg.sweep.f_max_mhz},
                   {"n_f", cfg.sweep.n_f}};
  root["output"] = {{"dir", cfg.output.dir}, {"svg", cfg.output.svg}};
  root["constants_version"] = std::string(kConstantsVersion);
  return root.dump(2) + "\n";
}

dynamics::PulseSequence parse_sequence_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw invalid_input_error(std::string("sequence: ") + e.what());
  }
  if (!root.is_object() || !root.contains("events") ||
      !root["events"].is_array()) {
    throw invalid_input_error("sequence: want an object with an 'events' array");
  }
  check_keys(root, "", {"events"});

  dynamics::PulseSequence seq;
  for (const auto& ev : root["events"]) {
    if (!ev.is_object() || ev.size() != 1) {
      throw invalid_input_error(
          "sequence: each event must be an object with exactly one of "
          "'pulse', 'delay_us', 'acquire'");
    }
    if (ev.contains("pulse")) {
      const json& p = ev["pulse"];
      if (!p.is_object()) {
        throw invalid_input_error("sequence: 'pulse' must be an object");
      }
      check_keys(p, "pulse", {"axis", "angle_pi", "duration_us"});
      dynamics::Pulse pulse;
      const std::string axis = get_str(p, "pulse", "axis", "x");
      if (axis == "x") {
        pulse.axis = dynamics::Axis::x;
      } else if (axis == "y") {
        pulse.axis = dynamics::Axis::y;
      } else {
        throw invalid_input_error("sequence: pulse.axis must be \"x\" or \"y\"");
      }
      if (!p.contains("angle_pi")) {
        throw invalid_input_error("sequence: pulse.angle_pi is required");
      }
      pulse.angle_rad = get_num(p, "pulse", "angle_pi", 0.0) * std::numbers::pi;
      pulse.duration_us = get_num(p, "pulse", "duration_us", 0.0);
      seq.events.push_back(pulse);
    } else if (ev.contains("delay_us")) {
      if (!ev["delay_us"].is_number()) {
        throw invalid_input_error("sequence: delay_us must be a number");
      }
      seq.events.push_back(dynamics::Delay{ev["delay_us"].get<double>()});
    } else if (ev.contains("acquire")) {
      if (!ev["acquire"].is_string()) {
        throw invalid_input_error("sequence: acquire must be a string tag");
      }
      seq.events.push_back(dynamics::Acquire{ev["acquire"].get<std::string>()});
    } else {
      throw invalid_input_error(
          "sequence: unknown event type (want 'pulse', 'delay_us', or "
          "'acquire')");
    }
  }
  return seq;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input_error(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input_error(path + ": cannot open for writing");
  out << content;
  if (!out) throw invalid_input_error(path + ": write failed");
}

// ---------------------------------------------------------------------------
// SVG quick-look
// ---------------------------------------------------------------------------

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_svg_series(const std::string& path, const std::vector<double>& x,
                      const std::vector<double>& y, const std::string& x_label,
                      const std::string& y_label, const std::string& title) {
  if (x.size() != y.size() || x.size() < 2) {
    throw invalid_input_error("write_svg_series: need >= 2 points");
  }
  const double width = 840, height = 520;
  const double ml = 80, mr = 20, mt = 44, mb = 64;
  double x_min = x[0], x_max = x[0], y_min = y[0], y_max = y[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    x_min = std::min(x_min, x[i]);
    x_max = std::max(x_max, x[i]);
    y_min = std::min(y_min, y[i]);
    y_max = std::max(y_max, y[i]);
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) {
    y_max += 0.5;
    y_min -= 0.5;
  }
  const double pw = width - ml - mr, ph = height - mt - mb;
  const auto px = [&](double v) { return ml + (v - x_min) / (x_max - x_min) * pw; };
  const auto py = [&](double v) { return mt + (y_max - v) / (y_max - y_min) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << escape_xml(title) << "</text>\n";
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape_xml(x_label) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 20 "
      << mt + ph / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  // Axis extent labels.
  svg << "<text x=\"" << ml << "\" y=\"" << height - mb + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << short_num(x_min) << "</text>\n";
  svg << "<text x=\"" << ml + pw << "\" y=\"" << height - mb + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << short_num(x_max) << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << mt + ph
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << short_num(y_min) << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << short_num(y_max) << "</text>\n";
  svg << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" "
         "points=\"";
  char buf[64];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.3f,%.3f ", px(x[i]), py(y[i]));
    svg << buf;
  }
  svg << "\"/>\n</svg>\n";
  write_text(path, svg.str());
}

}  // namespace spinres::io
