#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sphwin/frames.hpp"
#include "sphwin/grid.hpp"
#include "sphwin/mise.hpp"
#include "sphwin/sht.hpp"

namespace sphwin::io {

// Text formats. Numbers are written with 17 significant digits so that
// reading back reproduces every double exactly. Malformed input raises
// PreconditionError naming the file and line.

/// `# grid lmax=<n>` then `ring_index, phi_index, theta, phi, value` per point
/// of the minimal grid of that lmax.
void write_map(std::ostream& os, const SphereMap& map);
SphereMap read_map(std::istream& is, const std::string& name = "map");

/// `# lmax=<n> real=<0|1>` then `l, m, re, im` for m >= 0.
void write_alm(std::ostream& os, const HarmonicCoefficients& alm);
HarmonicCoefficients read_alm(std::istream& is, const std::string& name = "alm");

/// `# lmin=<a> lmax=<b> kind=<tag>` then `l, b`.
void write_window(std::ostream& os, const SpectralWindow& w);
SpectralWindow read_window(std::istream& is, const std::string& name = "window");

/// Rows `l, C`; missing multipoles are zero.
void write_spectrum(std::ostream& os, const PowerSpectrum& c);
PowerSpectrum read_spectrum(std::istream& is, const std::string& name = "spectrum");

/// Rows `l, lp, value` over a band matrix.
void write_band_matrix(std::ostream& os, int lmin, const linalg::Matrix& m);
linalg::Matrix read_band_matrix(std::istream& is, int& lmin, const std::string& name = "matrix");

struct CriterionRow {
  std::string window_id;
  std::string criterion;
  double theta0_deg = 0.0;
  double p = 0.0;
  double value = 0.0;
};

/// `window_id, criterion, theta0_deg, p, value` with a header row.
void write_criteria(std::ostream& os, const std::vector<CriterionRow>& rows);

/// JSON manifest {"lmin", "lmax", "scales": [{"label", "file"}]}; window
/// paths are stored relative to the manifest's directory.
void write_family(const std::filesystem::path& manifest, const WindowFamily& family,
                  const std::vector<std::filesystem::path>& window_files);
WindowFamily read_family(const std::filesystem::path& manifest);

/// Mask spec, JSON: {"axisym": [[start_deg, end_deg, value], ...], "apod_deg": a,
/// "lmax": n} or {"map": "file.csv", "lmax": n}. `default_lmax` applies when
/// "lmax" is absent. Relative map paths resolve against the mask file's directory.
WeightFunction read_mask(const std::filesystem::path& spec, int default_lmax);

/// File helpers that raise PreconditionError when a file cannot be opened.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sphwin::io
