#include "lrp/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lrp {

BudgetError::BudgetError(std::uint64_t required, std::uint64_t budget)
    : std::runtime_error("environment needs about " + std::to_string(required) +
                         " bytes, budget is " + std::to_string(budget)),
      required_(required),
      budget_(budget) {}

Environment::Environment(ModelParams params, std::uint64_t seed, std::vector<Edge> edges)
    : params_(params), torus_(params.torus()), seed_(seed) {
  params_.validate();
  const VertexId n = torus_.volume();
  std::vector<std::uint64_t> deg(static_cast<std::size_t>(n) + 1, 0);
  for (auto& [u, w] : edges) {
    if (u < 0 || w < 0 || u >= n || w >= n) throw std::invalid_argument("edge endpoint out of range");
    if (u == w) throw std::invalid_argument("self-loop");
    if (u > w) std::swap(u, w);
    ++deg[u + 1];
    ++deg[w + 1];
  }
  for (VertexId v = 0; v < n; ++v) deg[v + 1] += deg[v];
  offsets_ = deg;
  targets_.assign(offsets_.back(), 0);
  std::vector<std::uint64_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, w] : edges) {
    targets_[fill[u]++] = w;
    targets_[fill[w]++] = u;
  }
  for (VertexId v = 0; v < n; ++v) {
    auto b = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]);
    auto e = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]);
    std::sort(b, e);
    if (std::adjacent_find(b, e) != e) throw std::invalid_argument("duplicate edge");
    if (params_.nn_prob_one) {
      for (auto it = b; it != e; ++it) {
        if (is_unit(displacement(v, *it), params_.d)) throw std::invalid_argument("stored edge duplicates a forced edge");
      }
    }
  }
}

bool Environment::inside(const Point& p) const {
  for (int i = 0; i < params_.d; ++i) {
    if (p[i] < 0 || p[i] >= params_.L) return false;
  }
  return true;
}

int Environment::forced_count(VertexId v) const {
  if (!params_.nn_prob_one) return 0;
  if (params_.boundary == Boundary::torus) return 2 * params_.d;
  const Point p = torus_.point(v);
  int c = 0;
  for (int i = 0; i < params_.d; ++i) c += (p[i] > 0) + (p[i] + 1 < params_.L);
  return c;
}

Point Environment::forced_direction(VertexId v, int k) const {
  if (params_.boundary == Boundary::torus) {
    Point e;
    e[k / 2] = (k % 2 == 0) ? 1 : -1;
    return e;
  }
  const Point p = torus_.point(v);
  for (int i = 0; i < params_.d; ++i) {
    if (p[i] + 1 < params_.L) {
      if (k == 0) {
        Point e;
        e[i] = 1;
        return e;
      }
      --k;
    }
    if (p[i] > 0) {
      if (k == 0) {
        Point e;
        e[i] = -1;
        return e;
      }
      --k;
    }
  }
  throw std::out_of_range("forced_direction");
}

VertexId Environment::neighbor(VertexId v, std::int64_t k) const {
  const int f = forced_count(v);
  if (k < f) return torus_.index(torus_.point(v) + forced_direction(v, static_cast<int>(k)));
  return targets_[offsets_[v] + static_cast<std::uint64_t>(k - f)];
}

Point Environment::displacement(VertexId v, VertexId w) const {
  const Point a = torus_.point(v);
  const Point b = torus_.point(w);
  if (params_.boundary == Boundary::free) return b - a;
  return torus_.displacement(a, b);
}

bool Environment::has_edge(VertexId v, VertexId w) const {
  if (v == w) return false;
  if (params_.nn_prob_one && is_unit(displacement(v, w), params_.d)) {
    return params_.boundary == Boundary::torus || inside(torus_.point(v) + displacement(v, w));
  }
  auto nb = stored_neighbors(v);
  return std::binary_search(nb.begin(), nb.end(), w);
}

std::vector<VertexId> Environment::long_neighbors(VertexId v) const {
  std::vector<VertexId> out;
  for (VertexId w : stored_neighbors(v)) {
    if (!is_unit(displacement(v, w), params_.d)) out.push_back(w);
  }
  return out;
}

std::uint64_t Environment::edge_count() const {
  std::uint64_t forced = 0;
  for (VertexId v = 0; v < vertex_count(); ++v) forced += static_cast<std::uint64_t>(forced_count(v));
  return stored_edge_count() + forced / 2;
}

std::vector<Edge> Environment::stored_edges() const {
  std::vector<Edge> out;
  out.reserve(stored_edge_count());
  for (VertexId v = 0; v < vertex_count(); ++v) {
    for (VertexId w : stored_neighbors(v)) {
      if (v < w) out.emplace_back(v, w);
    }
  }
  return out;
}

std::uint64_t estimated_generation_bytes(const ModelParams& params) {
  const double v = static_cast<double>(params.volume());
  double stored_degree = 0.0;
  // Series over the displacement classes; cheap compared to generation.
  if (static_cast<double>(params.L) <= 1e7 && params.volume() <= (VertexId{1} << 26)) {
    stored_degree = params.nn_prob_one ? expected_long_degree(params) : expected_degree(params);
  } else {
    stored_degree = 2.0 * params.d + 64.0;
  }
  const double edges = v * stored_degree / 2.0;
  // Pair buffer + CSR targets + offsets + bookkeeping.
  return static_cast<std::uint64_t>(edges * 32.0 + v * 16.0);
}

namespace {

// Canonical representative test for a torus displacement class.
bool canonical_class(const Point& z, const Torus& t, bool& self_antipodal) {
  Point neg;
  for (int i = 0; i < t.d; ++i) neg[i] = t.min_image(-z[i]);
  self_antipodal = (neg == z);
  return z <= neg;
}

}  // namespace

Environment generate_environment(const ModelParams& params, std::uint64_t seed, const GenerateOptions& options) {
  params.validate();
  const std::uint64_t need = estimated_generation_bytes(params);
  if (need > options.memory_budget_bytes) throw BudgetError(need, options.memory_budget_bytes);

  const Torus t = params.torus();
  const VertexId n = t.volume();
  std::vector<Edge> edges;
  const bool torus = params.boundary == Boundary::torus;

  auto run_class = [&](const Point& z, std::uint64_t class_id, bool self_antipodal) {
    if (params.nn_prob_one && is_unit(z, params.d)) return;
    const double p = connection_probability(norm_of(z, params.d, params.norm), params);
    if (p <= 0.0) return;
    Stream stream(seed, Role::env_class, {class_id});
    std::uint64_t pos = 0;
    while (true) {
      const std::uint64_t skip = stream.geometric_skip(p);
      if (skip > static_cast<std::uint64_t>(n) - pos) break;
      pos += skip;
      const VertexId u = static_cast<VertexId>(pos - 1);
      const Point target = t.point(u) + z;
      if (torus) {
        const VertexId w = t.index(target);
        if (self_antipodal && w < u) continue;
        edges.emplace_back(u, w);
      } else {
        bool ok = true;
        for (int i = 0; i < params.d; ++i) ok = ok && target[i] >= 0 && target[i] < params.L;
        if (ok) edges.emplace_back(u, t.index(target));
      }
    }
  };

  if (torus) {
    for (VertexId cid = 1; cid < n; ++cid) {
      Point z = t.point(cid);
      for (int i = 0; i < params.d; ++i) z[i] = t.min_image(z[i]);
      bool anti = false;
      if (!canonical_class(z, t, anti)) continue;
      run_class(z, static_cast<std::uint64_t>(cid), anti);
    }
  } else {
    // Displacements with first nonzero coordinate positive, |z_i| < L.
    const Coord span = 2 * params.L - 1;
    const std::uint64_t classes = ipow(static_cast<std::uint64_t>(span), params.d);
    for (std::uint64_t c = 0; c < classes; ++c) {
      Point z;
      std::uint64_t rest = c;
      for (int i = 0; i < params.d; ++i) {
        z[i] = static_cast<Coord>(rest % static_cast<std::uint64_t>(span)) - (params.L - 1);
        rest /= static_cast<std::uint64_t>(span);
      }
      if (!(Point{} < z)) continue;
      run_class(z, c, false);
    }
  }
  return Environment(params, seed, std::move(edges));
}

Environment generate_environment_keyed(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  const Torus t = params.torus();
  const VertexId n = t.volume();
  std::vector<Edge> edges;
  for (VertexId u = 0; u < n; ++u) {
    const Point pu = t.point(u);
    for (VertexId w = u + 1; w < n; ++w) {
      const Point pw = t.point(w);
      const Point z = params.boundary == Boundary::torus ? t.displacement(pu, pw) : pw - pu;
      if (params.nn_prob_one && is_unit(z, params.d)) continue;
      const double p = connection_probability(norm_of(z, params.d, params.norm), params);
      if (edge_uniform(seed, static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(w)) < p) {
        edges.emplace_back(u, w);
      }
    }
  }
  return Environment(params, seed, std::move(edges));
}

}  // namespace lrp
