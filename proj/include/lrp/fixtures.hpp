#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lrp/local_chain.hpp"
#include "lrp/rng.hpp"

namespace lrp {

// Connected random ball: a random recursive tree on 2..max_size vertices, extra
// edges with probability `extra`, and up to one exit stub per non-root vertex.
BallGraph random_ball(Stream& stream, int max_size = 7, double extra = 0.2, double exit_prob = 0.3);

// Two random balls whose roots can both escape within `cap` (return probability < 1).
std::pair<BallGraph, BallGraph> random_vstar_sides(Stream& stream, std::optional<std::int64_t> cap, int max_size = 7,
                                                   double extra = 0.2, double exit_prob = 0.3);

BallGraph path_ball(int n);                 // root at one end
BallGraph star_ball(int leaves);            // root at the centre
BallGraph cycle_ball(int n);
BallGraph with_exits(BallGraph g, const std::vector<int>& exits);

struct OracleComparison {
  std::string fixture;
  std::string estimator;
  std::uint64_t seed = 0;
  double exact = 0.0;
  double estimate = 0.0;
  double half_width = 0.0;  // Wilson half-width of the estimate
  bool pass = false;        // |estimate - exact| <= 3 half-widths
};

struct OracleReport {
  std::vector<OracleComparison> comparisons;
  std::int64_t pairs = 0;          // fixture-seed pairs
  std::int64_t pairs_passing = 0;  // every comparison of the pair passes
  double fraction = 0.0;
  int max_states = 0;
};

// Monte Carlo estimators against their exact absorbing-chain or kernel-iteration
// counterparts on the bundled fixtures (all at most 2000 states).
OracleReport oracle_equivalence(std::uint64_t seed, int seeds_per_fixture = 5, std::int64_t trials = 4000);

}  // namespace lrp
