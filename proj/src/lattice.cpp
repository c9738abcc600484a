#include "lrp/lattice.hpp"

#include <stdexcept>

namespace lrp {

std::string to_string(const Point& p, int d) {
  std::string s = "(";
  for (int i = 0; i < d; ++i) {
    if (i) s += ",";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

namespace {

// Unrank idx in the box [-R,R]^d (mixed radix, first coordinate slowest).
void box_point(int d, Coord R, std::uint64_t idx, Point& out, int offset) {
  const std::uint64_t side = static_cast<std::uint64_t>(2 * R + 1);
  for (int i = d - 1; i >= 0; --i) {
    out[offset + i] = static_cast<Coord>(idx % side) - R;
    idx /= side;
  }
}

void shell_rec(int d, Coord R, std::uint64_t idx, Point& out, int offset) {
  if (d == 1) {
    out[offset] = idx == 0 ? -R : R;
    return;
  }
  const std::uint64_t face = ipow(static_cast<std::uint64_t>(2 * R + 1), d - 1);
  const std::uint64_t inner = shell_size(d - 1, static_cast<std::uint64_t>(R));
  if (idx < face) {
    out[offset] = -R;
    box_point(d - 1, R, idx, out, offset + 1);
    return;
  }
  idx -= face;
  const std::uint64_t middle = static_cast<std::uint64_t>(2 * R - 1) * inner;
  if (idx >= middle) {
    out[offset] = R;
    box_point(d - 1, R, idx - middle, out, offset + 1);
    return;
  }
  out[offset] = -R + 1 + static_cast<Coord>(idx / inner);
  shell_rec(d - 1, R, idx % inner, out, offset + 1);
}

}  // namespace

Point shell_point(int d, Coord R, std::uint64_t idx) {
  if (R < 1) throw std::domain_error("shell_point: radius must be >= 1");
  if (idx >= shell_size(d, static_cast<std::uint64_t>(R))) throw std::out_of_range("shell_point: index");
  Point p;
  shell_rec(d, R, idx, p, 0);
  return p;
}

void for_each_in_box(int d, Coord R, const std::function<void(const Point&)>& f) {
  const std::uint64_t n = ipow(static_cast<std::uint64_t>(2 * R + 1), d);
  Point p;
  for (std::uint64_t i = 0; i < n; ++i) {
    box_point(d, R, i, p, 0);
    f(p);
  }
}

}  // namespace lrp
