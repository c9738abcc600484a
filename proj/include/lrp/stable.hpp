#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lrp/lattice_law.hpp"
#include "lrp/model.hpp"
#include "lrp/rng.hpp"
#include "lrp/walk.hpp"

namespace lrp {

// Symmetric alpha-stable with characteristic function exp(-|scale * theta|^alpha)
// (Chambers-Mallows-Stuck). alpha = 2 gives N(0, 2 scale^2).
double stable_1d(double alpha, Stream& stream, double scale = 1.0);
std::vector<double> sample_stable_1d(double alpha, std::size_t n, Stream& stream, double scale = 1.0);

// Positive (alpha/2)-stable subordinator value with Laplace transform exp(-lambda^{alpha/2}).
double positive_stable(double beta, Stream& stream);

// Isotropic: E exp(i theta . X) = exp(-|theta|^alpha).
Eigen::VectorXd sample_isotropic_increment(double alpha, int d, Stream& stream);

struct StablePath {
  double alpha = 1.0;
  int d = 1;
  double scale = 1.0;
  std::vector<double> times;         // t_0 = 0 < ... < t_m
  Eigen::MatrixXd values;            // d x (m+1), values(:,0) = 0
};

StablePath sample_stable_path(double alpha, int d, const std::vector<double>& times, Stream& stream,
                              double scale = 1.0);

// Partial sums of i.i.d. jumps with P(Y = y) proportional to p(|y|), 1 <= |y|_inf <= r_max.
WalkPath discrete_reference_path(const ModelParams& params, std::int64_t n, Stream& stream,
                                 Coord r_max = Coord{1} << 40);
// Endpoint only, reusing a prepared law.
Point discrete_reference_endpoint(const LatticeJumpLaw& law, std::int64_t n, Stream& stream);

struct CalibrationReport {
  double alpha = 1.0;
  double scale = 1.0;
  std::string method = "median-quantile";
  double sample_median = 0.0;
  double reference_median = 0.0;
};

// Scale c with median|sample| = c * median|S_alpha|, the latter from `reference_draws` CMS draws.
CalibrationReport calibrate_scale(const std::vector<double>& sample, double alpha, std::uint64_t seed,
                                  std::size_t reference_draws = 1000000);

}  // namespace lrp
