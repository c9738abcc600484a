#include "lrp/model.hpp"

#include <cmath>

namespace lrp {

void ModelParams::validate() const {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("d must be in [1," + std::to_string(kMaxDim) + "]");
  if (!(s > d)) throw std::invalid_argument("s must exceed d");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and >= 0");
  if (L < 4) throw std::invalid_argument("L must be >= 4");
}

double connection_probability(double r, const ModelParams& params) {
  if (!(r >= 1.0)) throw std::domain_error("connection_probability: r < 1");
  if (r == 1.0 && params.nn_prob_one) return 1.0;
  return -std::expm1(-params.beta * std::pow(r, -params.s));
}

double edge_probability(const Point& z, const ModelParams& params) {
  if (params.nn_prob_one && is_unit(z, params.d)) return 1.0;
  return connection_probability(norm_of(z, params.d, params.norm), params);
}

namespace {

double degree_sum(const ModelParams& params, bool include_unit) {
  const Torus t = params.torus();
  const Coord lo = -((t.L - 1) / 2);
  const Coord hi = t.L / 2;
  double total = 0.0;
  if (params.d == 1) {
    for (Coord z = lo; z <= hi; ++z) {
      if (z == 0) continue;
      const Point p = make_point(z);
      if (!include_unit && is_unit(p, 1)) continue;
      total += edge_probability(p, params);
    }
    return total;
  }
  const VertexId n = t.volume();
  for (VertexId id = 0; id < n; ++id) {
    Point p = t.point(id);
    for (int i = 0; i < params.d; ++i) p[i] = t.min_image(p[i]);
    if (p == Point{}) continue;
    if (!include_unit && is_unit(p, params.d)) continue;
    total += edge_probability(p, params);
  }
  return total;
}

}  // namespace

double expected_degree(const ModelParams& params) { return degree_sum(params, true); }
double expected_long_degree(const ModelParams& params) { return degree_sum(params, false); }

std::string to_string(Boundary b) { return b == Boundary::torus ? "torus" : "free"; }
std::string to_string(Norm n) { return n == Norm::euclidean ? "2" : "inf"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "torus") return Boundary::torus;
  if (s == "free") return Boundary::free;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

Norm parse_norm(const std::string& s) {
  if (s == "2" || s == "euclidean") return Norm::euclidean;
  if (s == "inf" || s == "sup") return Norm::sup;
  throw std::invalid_argument("unknown norm '" + s + "'");
}

}  // namespace lrp
