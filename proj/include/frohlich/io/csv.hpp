#pragma once

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frohlich/analysis/contour.hpp"
#include "frohlich/analysis/scan.hpp"

namespace frohlich::io {

/// Formats numbers with 12 significant digits; NaN becomes an empty field.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    os_ << std::setprecision(12);
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << "\n";
  }

  CsvWriter& cell(double v) {
    sep();
    if (!std::isnan(v)) os_ << v;
    return *this;
  }
  CsvWriter& cell(int v) {
    sep();
    os_ << v;
    return *this;
  }
  CsvWriter& cell(const std::string& s) {
    sep();
    if (s.find_first_of(",\"\n") == std::string::npos) {
      os_ << s;
    } else {
      os_ << '"';
      for (char c : s) os_ << (c == '"' ? "\"\"" : std::string(1, c == '\n' ? ' ' : c));
      os_ << '"';
    }
    return *this;
  }
  CsvWriter& end_row() {
    os_ << "\n";
    first_ = true;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  void sep() {
    if (!first_) os_ << ",";
    first_ = false;
  }
  std::ostringstream os_;
  bool first_ = true;
};

inline std::vector<std::string> mode_columns(const std::string& prefix, int n) {
  std::vector<std::string> c;
  for (int i = 1; i <= n; ++i) c.push_back(prefix + std::to_string(i));
  return c;
}

/// Long-format sweep table: one row per grid cell.
inline std::string sweep_csv(const analysis::SweepResult& r) {
  std::vector<std::string> h;
  for (const auto& a : r.axes) h.push_back(a.name());
  for (const char* c : {"ok", "fraction", "baseline", "n_total", "target_mode", "argmax_mode",
                        "condensation_time", "fast_cavity", "weak_coupling", "sidebands_negligible",
                        "steady_branch", "residual", "error"})
    h.emplace_back(c);
  CsvWriter w(h);
  const std::size_t n1 = r.axes.size() == 2 ? r.axes[1].values.size() : 1;
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    const auto& c = r.cells[k];
    w.cell(r.axes[0].values[k / n1]);
    if (r.axes.size() == 2) w.cell(r.axes[1].values[k % n1]);
    w.cell(c.ok ? 1 : 0).cell(c.fraction).cell(c.baseline).cell(c.total);
    w.cell(c.ok ? c.target_mode + 1 : 0).cell(c.ok ? c.argmax_mode + 1 : 0);
    w.cell(c.condensation_time ? *c.condensation_time : std::nan(""));
    if (c.ok) {
      w.cell(c.validity.fast_cavity ? 1 : 0).cell(c.validity.weak_coupling ? 1 : 0);
      w.cell(c.validity.sidebands_negligible.value_or(true) ? 1 : 0);
    } else {
      w.cell(std::string()).cell(std::string()).cell(std::string());
    }
    w.cell(c.branch).cell(c.ok ? c.residual : std::nan("")).cell(c.error).end_row();
  }
  return w.str();
}

/// Contour polylines as plain "x y" lines; blank lines separate polylines.
inline std::string contour_text(const std::vector<analysis::Contour>& contours, const std::string& x_name,
                                const std::string& y_name) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "# columns: " << x_name << " " << y_name << "\n";
  for (const auto& c : contours) {
    os << "# level " << c.level << ", " << c.lines.size() << " polyline(s)\n";
    for (const auto& l : c.lines) {
      for (const auto& p : l) os << p.x << " " << p.y << "\n";
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace frohlich::io
