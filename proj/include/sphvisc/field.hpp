#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sphvisc/errors.hpp"
#include "sphvisc/gas_core.hpp"

namespace sphvisc {

/// Uniform node-centred grid over [x_lo, x_hi]; node i sits at x_lo + i dx.
struct Grid1D {
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::size_t nx = 3;

  Grid1D() = default;
  Grid1D(double lo, double hi, std::size_t n) : x_lo(lo), x_hi(hi), nx(n) {
    if (n < 3) throw DomainError("Grid1D: need at least 3 nodes");
    if (!(hi > lo)) throw DomainError("Grid1D: empty interval");
  }

  double dx() const { return (x_hi - x_lo) / static_cast<double>(nx - 1); }
  double x(std::size_t i) const {
    return i + 1 == nx ? x_hi : x_lo + static_cast<double>(i) * dx();
  }
};

/// Per-node values of T on a uniform grid, plus the time stamp.
template <class T>
struct Field1D {
  Grid1D grid;
  std::vector<T> data;
  double time = 0.0;

  Field1D() = default;
  Field1D(const Grid1D& g, T fill = T{}) : grid(g), data(g.nx, fill) {}
  Field1D(double lo, double hi, std::size_t n, T fill = T{}) : Field1D(Grid1D(lo, hi, n), fill) {}

  std::size_t nx() const { return grid.nx; }
  double dx() const { return grid.dx(); }
  double x(std::size_t i) const { return grid.x(i); }
  double x_lo() const { return grid.x_lo; }
  double x_hi() const { return grid.x_hi; }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }
};

using GasField = Field1D<GasState>;

/// Pair of scalar unknowns of the generic 2x2 parabolic system.
struct PQ {
  double p = 0.0;
  double q = 0.0;
};

using PQField = Field1D<PQ>;

/// Linear interpolation of a gas field at an arbitrary x inside the grid.
inline GasState interpolate(const GasField& f, double x) {
  if (x <= f.x_lo()) return f.data.front();
  if (x >= f.x_hi()) return f.data.back();
  const double s = (x - f.x_lo()) / f.dx();
  std::size_t i = static_cast<std::size_t>(s);
  if (i + 1 >= f.nx()) i = f.nx() - 2;
  const double w = s - static_cast<double>(i);
  return {(1.0 - w) * f[i].rho + w * f[i + 1].rho, (1.0 - w) * f[i].mom + w * f[i + 1].mom};
}

}  // namespace sphvisc
