#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gamow/core.hpp"
#include "gamow/parallel.hpp"
#include "gamow/star_shape.hpp"

namespace gamow {

// Pixelized set on the lattice pitch * Z^2.  Cell (i, j) covers
// [(ix0 + i) p, (ix0 + i + 1) p) x [(iy0 + j) p, (iy0 + j + 1) p).
struct RasterSet {
  double pitch = 1.0;
  long ix0 = 0;
  long iy0 = 0;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> mask;  // row-major, index j * nx + i

  RasterSet() = default;
  RasterSet(double p, long i0, long j0, int w, int h)
      : pitch(p), ix0(i0), iy0(j0), nx(w), ny(h), mask(static_cast<std::size_t>(w) * h, 0) {
    if (!(p > 0.0)) throw PreconditionError("raster: pitch must be > 0");
    if (w < 0 || h < 0) throw PreconditionError("raster: negative size");
  }

  Vec2 origin() const { return {static_cast<double>(ix0) * pitch, static_cast<double>(iy0) * pitch}; }
  bool at(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
    return mask[static_cast<std::size_t>(j) * nx + i] != 0;
  }
  void set(int i, int j, bool v = true) { mask[static_cast<std::size_t>(j) * nx + i] = v ? 1 : 0; }
  Vec2 cell_center(int i, int j) const {
    return {(static_cast<double>(ix0 + i) + 0.5) * pitch, (static_cast<double>(iy0 + j) + 0.5) * pitch};
  }
  std::size_t count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }
  bool empty() const { return count() == 0; }
};

inline double area(const RasterSet& r) { return static_cast<double>(r.count()) * r.pitch * r.pitch; }

// Edges between an occupied and an empty cell (or the outside), times pitch.
inline double perimeter(const RasterSet& r) {
  std::size_t edges = 0;
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) {
      if (!r.at(i, j)) continue;
      edges += !r.at(i - 1, j) + !r.at(i + 1, j) + !r.at(i, j - 1) + !r.at(i, j + 1);
    }
  return static_cast<double>(edges) * r.pitch;
}

// Occupied cells are those whose centre satisfies pred; the grid covers the
// box [lo, hi] snapped outwards to the lattice.
inline RasterSet raster_from_predicate(Vec2 lo, Vec2 hi, double pitch, const std::function<bool(Vec2)>& pred) {
  if (!(pitch > 0.0)) throw PreconditionError("raster: pitch must be > 0");
  const long i0 = static_cast<long>(std::floor(lo.x / pitch));
  const long j0 = static_cast<long>(std::floor(lo.y / pitch));
  const long i1 = static_cast<long>(std::ceil(hi.x / pitch));
  const long j1 = static_cast<long>(std::ceil(hi.y / pitch));
  RasterSet r(pitch, i0, j0, static_cast<int>(std::max(0L, i1 - i0)), static_cast<int>(std::max(0L, j1 - j0)));
  parallel_for(static_cast<std::size_t>(r.ny), [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    for (int i = 0; i < r.nx; ++i)
      if (pred(r.cell_center(i, j))) r.set(i, j);
  });
  return r;
}

inline RasterSet rasterize(const StarShape& s, double pitch) {
  if (!(pitch > 0.0)) throw PreconditionError("rasterize: pitch must be > 0");
  double rmax = 0.0;
  const std::size_t n = std::max<std::size_t>(4096, 16 * static_cast<std::size_t>(max_mode(s)));
  for (std::size_t i = 0; i < n; ++i) rmax = std::max(rmax, radius(s, 2.0 * kPi * static_cast<double>(i) / n));
  rmax = rmax * 1.01 + pitch;
  return raster_from_predicate({s.center.x - rmax, s.center.y - rmax}, {s.center.x + rmax, s.center.y + rmax}, pitch,
                               [&](Vec2 p) { return contains(s, p); });
}

// 1-D measure of the occupied cells in the column (axis 1) or row (axis 2)
// containing coordinate t.
inline double cross_section(const RasterSet& r, int axis, double t) {
  if (axis != 1 && axis != 2) throw PreconditionError("cross_section: axis must be 1 or 2");
  const long idx = static_cast<long>(std::floor(t / r.pitch));
  std::size_t c = 0;
  if (axis == 1) {
    const long i = idx - r.ix0;
    if (i < 0 || i >= r.nx) return 0.0;
    for (int j = 0; j < r.ny; ++j) c += r.at(static_cast<int>(i), j);
  } else {
    const long j = idx - r.iy0;
    if (j < 0 || j >= r.ny) return 0.0;
    for (int i = 0; i < r.nx; ++i) c += r.at(i, static_cast<int>(j));
  }
  return static_cast<double>(c) * r.pitch;
}

inline void require_compatible(const RasterSet& a, const RasterSet& b) {
  if (std::abs(a.pitch - b.pitch) > 1e-12 * a.pitch)
    throw PreconditionError("rasters must share the same pitch");
}

// Cellwise combination on the union of the two bounding boxes.
inline RasterSet combine(const RasterSet& a, const RasterSet& b, const std::function<bool(bool, bool)>& op) {
  require_compatible(a, b);
  const long i0 = std::min(a.ix0, b.ix0), j0 = std::min(a.iy0, b.iy0);
  const long i1 = std::max(a.ix0 + a.nx, b.ix0 + b.nx), j1 = std::max(a.iy0 + a.ny, b.iy0 + b.ny);
  RasterSet out(a.pitch, i0, j0, static_cast<int>(i1 - i0), static_cast<int>(j1 - j0));
  for (int j = 0; j < out.ny; ++j)
    for (int i = 0; i < out.nx; ++i) {
      const long gi = i0 + i, gj = j0 + j;
      const bool va = a.at(static_cast<int>(gi - a.ix0), static_cast<int>(gj - a.iy0));
      const bool vb = b.at(static_cast<int>(gi - b.ix0), static_cast<int>(gj - b.iy0));
      if (op(va, vb)) out.set(i, j);
    }
  return out;
}

inline RasterSet raster_union(const RasterSet& a, const RasterSet& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; });
}

inline double symmetric_difference(const RasterSet& a, const RasterSet& b) {
  return area(combine(a, b, [](bool x, bool y) { return x != y; }));
}

inline bool subset_of(const RasterSet& a, const RasterSet& b) {
  return combine(a, b, [](bool x, bool y) { return x && !y; }).empty();
}

inline RasterSet shift_cells(const RasterSet& r, long di, long dj) {
  RasterSet out = r;
  out.ix0 += di;
  out.iy0 += dj;
  return out;
}

// Smallest grid holding all occupied cells (an empty raster stays 0 x 0).
inline RasterSet trimmed(const RasterSet& r) {
  int i0 = r.nx, i1 = -1, j0 = r.ny, j1 = -1;
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i)
      if (r.at(i, j)) {
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
        j0 = std::min(j0, j);
        j1 = std::max(j1, j);
      }
  if (i1 < 0) return RasterSet(r.pitch, r.ix0, r.iy0, 0, 0);
  RasterSet out(r.pitch, r.ix0 + i0, r.iy0 + j0, i1 - i0 + 1, j1 - j0 + 1);
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i)
      if (r.at(i, j)) out.set(i - i0, j - j0);
  return out;
}

// ---------------------------------------------------------------------------
// Plain PBM (P1) with a versioned comment header carrying the placement:
//   P1
//   # gamow-raster 1
//   # lattice <ix0> <iy0>
//   # pitch <p>
//   <nx> <ny>
//   rows from top (largest j) to bottom, 1 = occupied

inline std::string to_pbm(const RasterSet& r) {
  std::ostringstream os;
  os.precision(17);
  os << "P1\n# gamow-raster 1\n# lattice " << r.ix0 << " " << r.iy0 << "\n# pitch " << r.pitch << "\n"
     << r.nx << " " << r.ny << "\n";
  for (int j = r.ny - 1; j >= 0; --j) {
    for (int i = 0; i < r.nx; ++i) os << (r.at(i, j) ? '1' : '0');
    os << "\n";
  }
  return os.str();
}

inline RasterSet from_pbm(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("P1", 0) != 0) throw PreconditionError("raster: expected P1 header");
  long ix0 = 0, iy0 = 0;
  double pitch = 0.0;
  bool versioned = false;
  int nx = -1, ny = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "gamow-raster") {
        int v = 0;
        ls >> v;
        if (v != 1) throw PreconditionError("raster: unsupported version");
        versioned = true;
      } else if (key == "lattice") {
        ls >> ix0 >> iy0;
      } else if (key == "pitch") {
        ls >> pitch;
      }
      continue;
    }
    std::istringstream ls(line);
    if (!(ls >> nx >> ny)) throw PreconditionError("raster: bad size line");
    break;
  }
  if (!versioned || !(pitch > 0.0) || nx < 0 || ny < 0) throw PreconditionError("raster: incomplete header");
  RasterSet r(pitch, ix0, iy0, nx, ny);
  std::vector<char> bits;
  char c;
  while (in.get(c))
    if (c == '0' || c == '1') bits.push_back(c);
  if (bits.size() != static_cast<std::size_t>(nx) * ny) throw PreconditionError("raster: wrong number of cells");
  std::size_t k = 0;
  for (int j = ny - 1; j >= 0; --j)
    for (int i = 0; i < nx; ++i) r.set(i, j, bits[k++] == '1');
  return r;
}

inline void write_pbm(const RasterSet& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write " + path);
  out << to_pbm(r);
}

inline RasterSet read_pbm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_pbm(ss.str());
}

inline json to_json_value(const RasterSet& r) {
  json rows = json::array();
  for (int j = r.ny - 1; j >= 0; --j) {
    std::string row(static_cast<std::size_t>(r.nx), '0');
    for (int i = 0; i < r.nx; ++i)
      if (r.at(i, j)) row[static_cast<std::size_t>(i)] = '1';
    rows.push_back(row);
  }
  return json{{"pitch", r.pitch}, {"lattice", {r.ix0, r.iy0}}, {"nx", r.nx}, {"ny", r.ny}, {"rows", rows}};
}

}  // namespace gamow
