#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "lrp/lattice.hpp"

namespace lrp {

enum class Boundary { torus, free };

struct ModelParams {
  int d = 1;
  double s = 2.5;
  double beta = 1.0;
  bool nn_prob_one = true;
  Coord L = 1024;
  Boundary boundary = Boundary::torus;
  Norm norm = Norm::euclidean;  // edge law; balls always use the sup norm

  void validate() const;
  Torus torus() const { return Torus{d, L}; }
  VertexId volume() const { return torus().volume(); }
  double alpha() const { return s - d; }
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// p(r) = 1 - exp(-beta r^-s), with p(1) = 1 when nearest-neighbour edges are forced.
double connection_probability(double r, const ModelParams& params);

// Probability for displacement z != 0 under the configured norm.
double edge_probability(const Point& z, const ModelParams& params);

inline bool is_unit(const Point& z, int d) {
  Coord l1 = 0;
  for (int i = 0; i < d; ++i) l1 += z[i] < 0 ? -z[i] : z[i];
  return l1 == 1;
}

// Mean degree on the torus (exact finite sum over min-image displacements).
double expected_degree(const ModelParams& params);

// Mean number of non-unit edges at a vertex.
double expected_long_degree(const ModelParams& params);

std::string to_string(Boundary b);
std::string to_string(Norm n);
Boundary parse_boundary(const std::string& s);
Norm parse_norm(const std::string& s);

}  // namespace lrp
