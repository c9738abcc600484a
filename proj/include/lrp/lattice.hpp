#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>

#include "lrp/rng.hpp"

namespace lrp {

inline constexpr int kMaxDim = 3;

using Coord = std::int64_t;
using VertexId = std::int64_t;

// Lattice point; coordinates beyond the active dimension stay zero.
struct Point {
  std::array<Coord, kMaxDim> x{};

  Coord& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  Coord operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;

  Point& operator+=(const Point& o) {
    for (int i = 0; i < kMaxDim; ++i) x[i] += o.x[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < kMaxDim; ++i) x[i] -= o.x[i];
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator-(const Point& a) { return Point{} - a; }
};

inline Point make_point(Coord a, Coord b = 0, Coord c = 0) { return Point{{a, b, c}}; }

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(p.x[0]));
    h = mix64(h ^ static_cast<std::uint64_t>(p.x[1]));
    h = mix64(h ^ static_cast<std::uint64_t>(p.x[2]));
    return static_cast<std::size_t>(h);
  }
};

enum class Norm { euclidean, sup };

inline Coord sup_norm(const Point& p, int d) {
  Coord m = 0;
  for (int i = 0; i < d; ++i) m = std::max<Coord>(m, p[i] < 0 ? -p[i] : p[i]);
  return m;
}

inline double euclidean_norm(const Point& p, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += static_cast<double>(p[i]) * static_cast<double>(p[i]);
  return std::sqrt(s);
}

inline double norm_of(const Point& p, int d, Norm n) {
  return n == Norm::sup ? static_cast<double>(sup_norm(p, d)) : euclidean_norm(p, d);
}

std::string to_string(const Point& p, int d);

// Finite torus (Z/LZ)^d with linear vertex ids.
struct Torus {
  int d = 1;
  Coord L = 1;

  Coord wrap(Coord c) const {
    Coord r = c % L;
    return r < 0 ? r + L : r;
  }
  // Representative in (-L/2, L/2].
  Coord min_image(Coord c) const {
    Coord r = wrap(c);
    return 2 * r > L ? r - L : r;
  }
  Point reduce(const Point& p) const {
    Point q;
    for (int i = 0; i < d; ++i) q[i] = wrap(p[i]);
    return q;
  }
  Point displacement(const Point& from, const Point& to) const {
    Point q;
    for (int i = 0; i < d; ++i) q[i] = min_image(to[i] - from[i]);
    return q;
  }
  VertexId index(const Point& p) const {
    VertexId id = 0;
    for (int i = d - 1; i >= 0; --i) id = id * L + wrap(p[i]);
    return id;
  }
  Point point(VertexId id) const {
    Point p;
    for (int i = 0; i < d; ++i) {
      p[i] = id % L;
      id /= L;
    }
    return p;
  }
  VertexId volume() const {
    VertexId v = 1;
    for (int i = 0; i < d; ++i) v *= L;
    return v;
  }
};

// Integer power for small exponents; saturates is the caller's problem.
inline std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Number of points with sup-norm exactly R in dimension d.
inline std::uint64_t shell_size(int d, std::uint64_t R) {
  if (R == 0) return 1;
  return ipow(2 * R + 1, d) - ipow(2 * R - 1, d);
}

// idx-th point (0-based) of the sup-norm shell of radius R >= 1.
Point shell_point(int d, Coord R, std::uint64_t idx);

// Visit every point with sup-norm <= R.
void for_each_in_box(int d, Coord R, const std::function<void(const Point&)>& f);

}  // namespace lrp
