#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "frohlich/analysis/scan.hpp"
#include "frohlich/errors.hpp"

namespace frohlich::analysis {

struct ContourPoint {
  double x = 0.0;  // first axis, in its own units
  double y = 0.0;  // second axis
};

using Polyline = std::vector<ContourPoint>;

struct Contour {
  double level = 0.0;
  std::vector<Polyline> lines;
};

/// Iso-lines of a field sampled on a rectangular grid by marching squares.
/// Crossings are interpolated linearly in each axis' own coordinate (its
/// logarithm for logarithmic axes). NaN cells are skipped. Saddles are
/// resolved with the cell-centre average.
inline Contour extract_contour(const Axis& ax, const Axis& ay, const std::vector<double>& z, double level) {
  const std::size_t nx = ax.values.size(), ny = ay.values.size();
  if (z.size() != nx * ny) throw ValidationError("contour field does not match the grid");
  auto coord = [](const Axis& a, std::size_t i) { return a.logarithmic ? std::log(a.values[i]) : a.values[i]; };
  auto uncoord = [](const Axis& a, double c) { return a.logarithmic ? std::exp(c) : c; };
  auto at = [&](std::size_t i, std::size_t j) { return z[i * ny + j]; };

  // An edge is identified by its lower-left grid node and direction (0: along x, 1: along y).
  using Edge = std::tuple<std::size_t, std::size_t, int>;
  auto point_on = [&](const Edge& e) {
    const auto [i, j, dir] = e;
    const std::size_t i2 = dir == 0 ? i + 1 : i, j2 = dir == 1 ? j + 1 : j;
    const double z1 = at(i, j), z2 = at(i2, j2);
    const double t = (level - z1) / (z2 - z1);
    const double cx = coord(ax, i) + t * (coord(ax, i2) - coord(ax, i));
    const double cy = coord(ay, j) + t * (coord(ay, j2) - coord(ay, j));
    return ContourPoint{uncoord(ax, cx), uncoord(ay, cy)};
  };

  std::vector<std::pair<Edge, Edge>> segments;
  for (std::size_t i = 0; i + 1 < nx; ++i)
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const double v[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      if (std::any_of(v, v + 4, [](double x) { return std::isnan(x); })) continue;
      int mask = 0;
      for (int k = 0; k < 4; ++k)
        if (v[k] >= level) mask |= 1 << k;
      if (mask == 0 || mask == 15) continue;
      const Edge bottom{i, j, 0}, right{i + 1, j, 1}, top{i, j + 1, 0}, left{i, j, 1};
      switch (mask) {
        case 1: case 14: segments.emplace_back(left, bottom); break;
        case 2: case 13: segments.emplace_back(bottom, right); break;
        case 3: case 12: segments.emplace_back(left, right); break;
        case 4: case 11: segments.emplace_back(right, top); break;
        case 6: case 9: segments.emplace_back(bottom, top); break;
        case 7: case 8: segments.emplace_back(left, top); break;
        case 5: case 10: {
          const bool centre_high = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= level;
          if ((mask == 5) == centre_high) {
            segments.emplace_back(left, top);
            segments.emplace_back(bottom, right);
          } else {
            segments.emplace_back(left, bottom);
            segments.emplace_back(right, top);
          }
          break;
        }
      }
    }

  // Chain segments that share an edge crossing into polylines.
  std::multimap<Edge, std::size_t> by_edge;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    by_edge.emplace(segments[s].first, s);
    by_edge.emplace(segments[s].second, s);
  }
  std::vector<bool> used(segments.size(), false);
  auto next_segment = [&](const Edge& e) -> std::optional<std::size_t> {
    auto [lo, hi] = by_edge.equal_range(e);
    for (auto it = lo; it != hi; ++it)
      if (!used[it->second]) return it->second;
    return std::nullopt;
  };
  auto degree = [&](const Edge& e) { return by_edge.count(e); };

  Contour c;
  c.level = level;
  // Start open chains at their ends first so each comes out whole.
  std::vector<std::size_t> order(segments.size());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const bool ea = degree(segments[a].first) == 1 || degree(segments[a].second) == 1;
    const bool eb = degree(segments[b].first) == 1 || degree(segments[b].second) == 1;
    return ea > eb;
  });
  for (std::size_t s0 : order) {
    if (used[s0]) continue;
    used[s0] = true;
    Edge head = segments[s0].first, tail = segments[s0].second;
    if (degree(tail) == 1 && degree(head) != 1) std::swap(head, tail);
    std::vector<Edge> chain{head, tail};
    while (auto s = next_segment(chain.back())) {
      used[*s] = true;
      chain.push_back(segments[*s].first == chain.back() ? segments[*s].second : segments[*s].first);
    }
    Polyline line;
    for (const auto& e : chain) line.push_back(point_on(e));
    c.lines.push_back(std::move(line));
  }
  return c;
}

/// Contour of the condensate fraction of a 2-D sweep.
inline Contour fraction_contour(const SweepResult& r, double level) {
  if (r.axes.size() != 2) throw ValidationError("contours need a 2-D sweep");
  std::vector<double> z;
  z.reserve(r.cells.size());
  for (const auto& c : r.cells) z.push_back(c.ok ? c.fraction : std::numeric_limits<double>::quiet_NaN());
  return extract_contour(r.axes[0], r.axes[1], z, level);
}

/// (max - min) / mean of a set of values, the spread used for collapse checks.
inline double relative_spread(const std::vector<double>& v) {
  if (v.empty()) throw ValidationError("relative spread of an empty set");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  return (*hi - *lo) / mean;
}

}  // namespace frohlich::analysis
