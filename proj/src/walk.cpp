#include "lrp/walk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace lrp {

WalkPath run_walk(const Environment& env, VertexId start, std::int64_t n, Stream stream, std::uint64_t walk_index) {
  return run_walk(EnvironmentView{&env}, start, n, stream, walk_index);
}

std::vector<WalkPath> run_ensemble(const Environment& env, VertexId start, std::int64_t n, std::uint64_t count,
                                   std::uint64_t master) {
  std::vector<WalkPath> out;
  out.reserve(count);
  for (std::uint64_t l = 0; l < count; ++l) out.push_back(run_walk(env, start, n, Stream(master, Role::walk, {l}), l));
  return out;
}

Eigen::VectorXd StepFunction::operator()(double t) const {
  if (t < 0.0 || t > 1.0) throw std::domain_error("StepFunction: t outside [0,1]");
  const double x = t * static_cast<double>(n);
  auto i = static_cast<std::int64_t>(std::floor(x));
  if (i >= n) return values.col(n);
  if (mode == Interpolation::step) return values.col(i);
  const double frac = x - static_cast<double>(i);
  return values.col(i) + frac * (values.col(i + 1) - values.col(i));
}

StepFunction rescale_path(const WalkPath& path, double a, Interpolation mode) {
  if (!(a > 0.0)) throw std::domain_error("rescale_path: exponent must be positive");
  const std::int64_t n = path.steps();
  if (n < 1) throw std::domain_error("rescale_path: need at least one step");
  StepFunction f;
  f.n = n;
  f.exponent = a;
  f.mode = mode;
  f.values.resize(path.d, n + 1);
  const double scale = std::pow(static_cast<double>(n), a);
  for (std::int64_t i = 0; i <= n; ++i) {
    for (int c = 0; c < path.d; ++c) f.values(c, i) = static_cast<double>(path.positions[i][c]) / scale;
  }
  return f;
}

namespace {

double magnitude(const Eigen::VectorXd& v, Norm norm) {
  return norm == Norm::sup ? v.cwiseAbs().maxCoeff() : v.norm();
}

constexpr std::array<double, 8> kGaussNodes = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                               0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                               0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGaussWeights = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                                 0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                                 0.0622535239386479, 0.0271524594117541};

}  // namespace

double lq_distance(const StepFunction& f, const StepFunction& g, double q, Norm pointwise) {
  if (!(q >= 1.0)) throw std::domain_error("lq_distance: q < 1");
  if (f.dimension() != g.dimension()) throw std::invalid_argument("lq_distance: dimension mismatch");
  // Merge breakpoints i/nf and j/ng using exact integer comparison.
  const std::int64_t nf = f.n, ng = g.n;
  std::int64_t i = 0, j = 0;
  double total = 0.0;
  const bool exact = f.mode == Interpolation::step && g.mode == Interpolation::step;
  while (i < nf || j < ng) {
    const __int128 left_i = static_cast<__int128>(i) * ng;
    const __int128 left_j = static_cast<__int128>(j) * nf;
    // Cell [max(i/nf, j/ng), min((i+1)/nf, (j+1)/ng)).
    const __int128 right_i = static_cast<__int128>(i + 1) * ng;
    const __int128 right_j = static_cast<__int128>(j + 1) * nf;
    const double lo = static_cast<double>(std::max(left_i, left_j)) / static_cast<double>(nf * ng);
    const double hi = static_cast<double>(std::min(right_i, right_j)) / static_cast<double>(nf * ng);
    if (hi > lo) {
      if (exact) {
        total += std::pow(magnitude(f.values.col(i) - g.values.col(j), pointwise), q) * (hi - lo);
      } else {
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double cell = 0.0;
        for (std::size_t k = 0; k < kGaussNodes.size(); ++k) {
          for (double sgn : {-1.0, 1.0}) {
            const double t = std::clamp(mid + sgn * half * kGaussNodes[k], 0.0, 1.0);
            cell += kGaussWeights[k] * std::pow(magnitude(f(t) - g(t), pointwise), q);
          }
        }
        total += cell * half;
      }
    }
    if (right_i < right_j) {
      ++i;
    } else if (right_j < right_i) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return std::pow(total, 1.0 / q);
}

void write_path_csv(const WalkPath& path, const std::string& metadata_json, std::ostream& out) {
  out << "# " << metadata_json << '\n' << "i";
  for (int c = 0; c < path.d; ++c) out << ",x" << (c + 1);
  out << ",new,jump\n";
  for (std::size_t i = 0; i < path.positions.size(); ++i) {
    out << i;
    for (int c = 0; c < path.d; ++c) out << ',' << path.positions[i][c];
    out << ',' << static_cast<int>(path.is_new[i]) << ',' << path.jump[i] << '\n';
  }
}

}  // namespace lrp
