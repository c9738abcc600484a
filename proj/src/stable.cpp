#include "lrp/stable.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

#include "lrp/stats.hpp"

namespace lrp {

namespace {

void check_alpha(double alpha, bool allow_two) {
  if (!(alpha > 0.0) || alpha > 2.0 || (!allow_two && alpha == 2.0)) throw std::domain_error("alpha out of range");
}

}  // namespace

double stable_1d(double alpha, Stream& stream, double scale) {
  check_alpha(alpha, true);
  if (alpha == 2.0) return std::numbers::sqrt2 * scale * stream.normal();
  const double v = std::numbers::pi * (stream.uniform() - 0.5);
  if (alpha == 1.0) return scale * std::tan(v);
  const double w = stream.exponential();
  const double x = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
  return scale * x;
}

std::vector<double> sample_stable_1d(double alpha, std::size_t n, Stream& stream, double scale) {
  check_alpha(alpha, true);
  std::vector<double> out(n);
  for (auto& x : out) x = stable_1d(alpha, stream, scale);
  return out;
}

double positive_stable(double beta, Stream& stream) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("positive_stable: index must be in (0,1)");
  // Kanter's representation.
  const double u = std::numbers::pi * stream.uniform();
  const double w = stream.exponential();
  return std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta) *
         std::pow(std::sin((1.0 - beta) * u) / w, (1.0 - beta) / beta);
}

Eigen::VectorXd sample_isotropic_increment(double alpha, int d, Stream& stream) {
  check_alpha(alpha, false);
  if (d < 1) throw std::domain_error("sample_isotropic_increment: d must be >= 1");
  const double a = positive_stable(alpha / 2.0, stream);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = std::numbers::sqrt2 * std::sqrt(a) * stream.normal();
  return x;
}

StablePath sample_stable_path(double alpha, int d, const std::vector<double>& times, Stream& stream, double scale) {
  check_alpha(alpha, true);
  if (times.size() < 2 || times.front() != 0.0) throw std::invalid_argument("stable path grid must start at 0");
  StablePath p;
  p.alpha = alpha;
  p.d = d;
  p.scale = scale;
  p.times = times;
  p.values = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(times.size()));
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    if (!(dt > 0.0)) throw std::invalid_argument("stable path grid must increase");
    Eigen::VectorXd inc(d);
    if (d == 1 || alpha == 2.0) {
      for (int c = 0; c < d; ++c) inc[c] = stable_1d(alpha, stream);
    } else {
      inc = sample_isotropic_increment(alpha, d, stream);
    }
    p.values.col(static_cast<Eigen::Index>(i)) =
        p.values.col(static_cast<Eigen::Index>(i - 1)) + scale * std::pow(dt, 1.0 / alpha) * inc;
  }
  return p;
}

WalkPath discrete_reference_path(const ModelParams& params, std::int64_t n, Stream& stream, Coord r_max) {
  if (!(params.s > params.d)) throw std::invalid_argument("discrete_reference_path: non-summable law");
  const LatticeJumpLaw law(params, r_max);
  WalkPath path;
  path.d = params.d;
  path.stream_key = stream.key();
  Point pos;
  std::unordered_set<Point, PointHash> seen{pos};
  path.positions.push_back(pos);
  path.jump.push_back(0);
  path.is_new.push_back(1);
  for (std::int64_t i = 0; i < n; ++i) {
    const Point y = law.sample(stream);
    pos += y;
    path.positions.push_back(pos);
    path.jump.push_back(sup_norm(y, params.d));
    path.is_new.push_back(seen.insert(pos).second ? 1 : 0);
  }
  path.sites = path.positions;
  return path;
}

Point discrete_reference_endpoint(const LatticeJumpLaw& law, std::int64_t n, Stream& stream) {
  Point pos;
  for (std::int64_t i = 0; i < n; ++i) pos += law.sample(stream);
  return pos;
}

CalibrationReport calibrate_scale(const std::vector<double>& sample, double alpha, std::uint64_t seed,
                                  std::size_t reference_draws) {
  CalibrationReport r;
  r.alpha = alpha;
  std::vector<double> a;
  a.reserve(sample.size());
  for (double x : sample) a.push_back(std::fabs(x));
  r.sample_median = median(std::move(a));
  Stream s(seed, Role::calibration);
  std::vector<double> ref = sample_stable_1d(alpha, reference_draws, s);
  for (auto& x : ref) x = std::fabs(x);
  r.reference_median = median(std::move(ref));
  r.scale = r.sample_median / r.reference_median;
  return r;
}

}  // namespace lrp
