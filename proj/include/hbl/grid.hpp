#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "hbl/core.hpp"

namespace hbl {

using PointFunction = std::function<cplx(const Point&)>;

// Uniform grid on [-L, L)^{2n}: nodes x_i = -L + i h, h = 2L / steps, axes ordered (Re z1, Im z1, Re z2, ...).
struct GridGeometry {
  int n = 1;
  double L = 12.0;
  int steps = 256;

  void validate() const {
    require(n >= 1 && n <= 2, "grid functions support n = 1 or 2");
    require(L > 0 && std::isfinite(L), "grid extent must be positive");
    require(steps >= 2 && steps % 2 == 0, "steps per axis must be an even integer >= 2");
  }
  double h() const { return 2 * L / steps; }
  double node(int i) const { return -L + i * h(); }
  int axes() const { return 2 * n; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < axes(); ++a) s *= static_cast<std::size_t>(steps);
    return s;
  }
  Point point(const std::array<int, 2 * kMaxDim>& idx) const {
    Point p(n);
    for (int j = 0; j < n; ++j) p[j] = {node(idx[2 * j]), node(idx[2 * j + 1])};
    return p;
  }
  friend bool operator==(const GridGeometry& a, const GridGeometry& b) {
    return a.n == b.n && a.L == b.L && a.steps == b.steps;
  }
};

struct GridFunction {
  GridGeometry geometry;
  std::vector<cplx> samples;  // row-major, axis 0 slowest
  std::string provenance;

  static GridFunction sample(const GridGeometry& g, const PointFunction& f, std::string provenance = {}) {
    g.validate();
    GridFunction out{g, std::vector<cplx>(g.size()), std::move(provenance)};
    std::array<int, 2 * kMaxDim> idx{};
    for (std::size_t t = 0; t < out.samples.size(); ++t) {
      out.samples[t] = f(g.point(idx));
      for (int a = g.axes() - 1; a >= 0; --a) {
        if (++idx[a] < g.steps) break;
        idx[a] = 0;
      }
    }
    out.validate();
    return out;
  }

  void validate() const {
    geometry.validate();
    if (samples.size() != geometry.size()) throw data_error("sample count does not match the grid geometry");
    for (const auto& v : samples)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw data_error("grid function has non-finite samples");
  }

  GridFunction conj() const {
    GridFunction r = *this;
    for (auto& v : r.samples) v = std::conj(v);
    return r;
  }
};

// Binary layout: "HBLG", u32 version, i32 n, f64 L, i32 steps, u32 bytes per sample (8 or 16),
// u32 provenance length + bytes, then little-endian complex samples.
inline void write_grid(const std::string& path, const GridFunction& f, bool single_precision = false) {
  static_assert(std::endian::native == std::endian::little, "grid I/O assumes a little-endian host");
  f.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open " + path + " for writing");
  auto put = [&](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  out.write("HBLG", 4);
  put(std::uint32_t{1});
  put(std::int32_t{f.geometry.n});
  put(f.geometry.L);
  put(std::int32_t{f.geometry.steps});
  put(std::uint32_t{single_precision ? 8u : 16u});
  put(static_cast<std::uint32_t>(f.provenance.size()));
  out.write(f.provenance.data(), static_cast<std::streamsize>(f.provenance.size()));
  for (const auto& v : f.samples) {
    if (single_precision) {
      put(static_cast<float>(v.real()));
      put(static_cast<float>(v.imag()));
    } else {
      put(v.real());
      put(v.imag());
    }
  }
  if (!out) throw data_error("failed writing " + path);
}

inline GridFunction read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  auto get = [&](auto& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw data_error("truncated grid file " + path);
  };
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HBLG", 4) != 0) throw data_error(path + " is not a grid file");
  std::uint32_t version, width, plen;
  std::int32_t n, steps;
  double L;
  get(version);
  if (version != 1) throw data_error("unsupported grid file version");
  get(n);
  get(L);
  get(steps);
  get(width);
  if (width != 8 && width != 16) throw data_error("unsupported sample width");
  get(plen);
  GridFunction f;
  f.geometry = {n, L, steps};
  try {
    f.geometry.validate();
  } catch (const precondition_error& e) {
    throw data_error(std::string("bad grid header: ") + e.what());
  }
  f.provenance.resize(plen);
  in.read(f.provenance.data(), plen);
  f.samples.resize(f.geometry.size());
  for (auto& v : f.samples) {
    if (width == 8) {
      float re, im;
      get(re);
      get(im);
      v = {re, im};
    } else {
      double re, im;
      get(re);
      get(im);
      v = {re, im};
    }
  }
  f.validate();
  return f;
}

}  // namespace hbl
