// io.hpp — Deterministic file plumbing for the toolkit: CSV tables and
// traces, strict JSON run configuration, pulse-sequence JSON, and a minimal
// SVG quick-look writer.
//
// Determinism contract: all floats are written as 12-significant-digit
// scientific notation ("%.11e"), columns in fixed order, so identical inputs
// produce byte-identical files.
#pragma once

#include <string>
#include <vector>

#include "spinres/atomkit.hpp"
#include "spinres/cavity.hpp"
#include "spinres/dynamics.hpp"
#include "spinres/ensemble.hpp"
#include "spinres/fitkit.hpp"

namespace spinres::io {

// ---------------------------------------------------------------------------
// CSV: comma-separated, '#'-prefixed comment lines, first non-comment row is
// the header.  Parse errors name the 1-based row number.
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_float(double v);  // "%.11e"

Table read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& comments = {});

// Complex traces: header freq_mhz,re,im or freq_mhz,mag_db,phase_deg
// (auto-detected on read; mag_db = 20*log10|y|, phase in degrees).
// Magnitude-only traces: header freq_mhz,mag.
fitkit::Trace read_trace_csv(const std::string& path);
void write_trace_csv(const std::string& path, const fitkit::Trace& trace,
                     const std::vector<std::string>& comments = {});

// ---------------------------------------------------------------------------
// Run configuration: one JSON document, strict schema.  Unknown keys are
// rejected with their full key path (e.g. "resonator.kappa_x").
// ---------------------------------------------------------------------------

struct SweepConfig {
  double b_min_gauss{750};
  double b_max_gauss{810};
  int n_b{121};
  double f_min_mhz{3705};
  double f_max_mhz{3722};
  int n_f{401};
};

struct OutputConfig {
  std::string dir{"."};
  bool svg{false};
};

struct RunConfig {
  atomkit::AtomSpec atom{};                // defaults to sodium
  cavity::ResonatorParams resonator{};
  ensemble::EnsembleModel ens{};
  int n_packets{2001};
  double span_widths{6.0};
  SweepConfig sweep{};
  OutputConfig output{};
};

RunConfig parse_run_config(const std::string& json_text);

// Fully resolved configuration echo (every field explicit) plus the
// constants-table version; embedded in every output's JSON sidecar.
std::string run_config_json(const RunConfig& cfg);

// Pulse sequences as JSON: {"events":[{"pulse":{"axis":"y","angle_pi":1.0}},
// {"delay_us":100.0},{"acquire":"echo1"}]}.  Angles are given in units of pi.
dynamics::PulseSequence parse_sequence_json(const std::string& json_text);

// ---------------------------------------------------------------------------
// Small file helpers and the SVG quick-look plot (single polyline).
// ---------------------------------------------------------------------------

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

void write_svg_series(const std::string& path, const std::vector<double>& x,
                      const std::vector<double>& y, const std::string& x_label,
                      const std::string& y_label, const std::string& title);

}  // namespace spinres::io
