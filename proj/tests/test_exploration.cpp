#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "lrp/exploration.hpp"

using namespace lrp;

namespace {

ModelParams line(double s, double beta, Coord L = 1 << 20) {
  ModelParams p;
  p.d = 1;
  p.s = s;
  p.beta = beta;
  p.L = L;
  return p;
}

ExplorationConfig lazy_config(double beta, int k, std::uint64_t walks, std::uint64_t seed) {
  ExplorationConfig c;
  c.params = line(1.8, beta);
  c.seed = seed;
  c.k = k;
  c.walks = walks;
  c.gamma = 0.25;
  c.pilot = 400;
  return c;
}

// Sum over |z| > rho of 2 p(z) in d = 1, tail beyond the direct range by its integral.
double tail_series(const ModelParams& p, Coord rho) {
  const Coord M = 2000000;
  double total = 0.0;
  for (Coord r = rho + 1; r <= M; ++r) total += 2.0 * (1.0 - std::exp(-p.beta * std::pow(static_cast<double>(r), -p.s)));
  total += 2.0 * p.beta * std::pow(static_cast<double>(M) + 0.5, 1.0 - p.s) / (p.s - 1.0);
  return total;
}

}  // namespace

TEST_CASE("scale parameters") {
  const Scales a = scale_parameters(14, 1.8, 1);
  CHECK(a.rho_clamped);
  CHECK(a.rho == 2);
  CHECK(a.delta == doctest::Approx(0.125));
  CHECK(a.gamma == doctest::Approx(0.125 / 8));
  CHECK(a.ball_radius == 3);
  CHECK(a.return_cap == 1);

  const Scales b = scale_parameters(20, 1.5, 1);
  CHECK(b.delta == doctest::Approx(0.5));
  CHECK(b.ball_radius == 1024);

  const Scales c = scale_parameters(12, 1.8, 1, 0.25, Coord{40});
  CHECK(c.rho == 40);
  CHECK(c.rho_overridden);
  CHECK_FALSE(c.rho_clamped);
  CHECK(c.return_cap == 7);
  CHECK(c.phase_length == 16);
  CHECK(c.small_ball == false);

  const Scales e = scale_parameters(8, 1.5, 1, 0.25, Coord{4});
  CHECK(e.return_cap == 3);  // 2^2 itself is excluded
  CHECK(e.overlapping_balls);

  CHECK_THROWS_AS(scale_parameters(12, 2.5, 1), UnsupportedError);
  CHECK_THROWS_AS(scale_parameters(12, 1.0, 1), UnsupportedError);
}

TEST_CASE("phase longer than the walk is rejected") {
  ExplorationConfig c = lazy_config(1.0, 4, 1, 1);
  c.gamma = 1.0;
  CHECK_THROWS_AS(run_exploration(c), std::invalid_argument);
}

TEST_CASE("beta = 0: no long edges and no errors") {
  ExplorationResult r = run_exploration(lazy_config(0.0, 10, 3, 2));
  for (const WalkTranscript& t : r.state.transcripts) {
    CHECK(t.error_free());
    CHECK(t.long_edges.empty());
    for (const NewVertexRecord& nv : t.new_vertices) CHECK(nv.w_opens == 0);
    for (const StepRecord& s : t.steps) CHECK(std::abs(s.pos[0] - s.site[0]) == 0);
  }
  const EventReport e = event_scan(r.state, 0);
  CHECK(e.A == 0.0);
  CHECK(e.B == 0.0);
  CHECK(e.D == 0.0);
  CHECK(e.E == 0.0);
  CHECK(e.F == 0.0);
  CHECK(e.G == 0.0);
  CHECK(e.coupling_success == true);
}

TEST_CASE("transcript invariants on the lazy line") {
  ExplorationResult r = run_exploration(lazy_config(1.0, 11, 4, 3));
  const ExplorationState& st = r.state;
  std::int64_t specials = 0;
  for (const WalkTranscript& t : st.transcripts) {
    REQUIRE(t.steps.size() == (std::size_t{1} << 11));
    std::vector<std::int64_t> running(t.phi.size(), 0);
    std::int64_t flagged = 0, codes = 0;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const StepRecord& s = t.steps[i];
      if (s.A) CHECK(s.B == 0);
      if (s.phase) CHECK(s.cell == -1);
      if (s.cell >= 0) {
        ++running[static_cast<std::size_t>(s.cell)];
        CHECK(s.phi == running[static_cast<std::size_t>(s.cell)]);
      }
      flagged += s.B != 0;
      if (i + 1 < t.steps.size()) {
        const Point next = t.steps[i + 1].site;
        CHECK(st.edge(s.site, next).value_or(false));
      }
    }
    CHECK(running == t.phi);
    for (std::size_t c = 1; c < t.errors.size(); ++c) codes += t.errors[c];
    CHECK(codes >= flagged);
    specials += static_cast<std::int64_t>(t.long_edges.size());
    for (const LongEdgeEvent& ev : t.long_edges) {
      CHECK(st.distance(ev.v, ev.x) > st.scales().rho);
      CHECK(t.steps[static_cast<std::size_t>(ev.step)].A == 1);
      CHECK(ev.x_side == (ev.R_v > ev.R_x));
    }
  }
  MESSAGE("special phases: " << specials);
}

TEST_CASE("revealed graph is symmetric and reveals are idempotent") {
  ExplorationResult r = run_exploration(lazy_config(1.0, 9, 2, 4));
  ExplorationState& st = r.state;
  std::vector<Point> sites;
  for (const WalkPath& p : st.paths) sites.insert(sites.end(), p.sites.begin(), p.sites.end());
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  for (const Point& a : sites) {
    REQUIRE(st.full(a));
    for (const Point& b : st.neighbours(a)) {
      CHECK(st.edge(b, a) == true);
      CHECK(st.edge(a, b) == true);
    }
    CHECK(st.edge(a, a) == false);
  }
  const std::size_t before = st.registry_size();
  std::map<Point, std::vector<Point>> nb;
  for (const Point& a : sites) nb[a] = st.neighbours(a);
  for (const Point& a : sites) {
    st.reveal_ball(a);
    st.make_full(a, nullptr);
  }
  CHECK(st.registry_size() == before);
  for (const Point& a : sites) CHECK(st.neighbours(a) == nb[a]);
}

TEST_CASE("oracle exploration on the keyed torus equals the keyed environment") {
  ModelParams p = line(1.8, 1.5, 48);
  const Environment env = generate_environment_keyed(p, 21);
  for (ExplorationBackend backend : {ExplorationBackend::keyed_torus, ExplorationBackend::materialized}) {
    ExplorationConfig c;
    c.params = p;
    c.seed = 21;
    c.k = 9;
    c.walks = 3;
    c.gamma = 0.25;
    c.rho = 4;
    c.pilot = 100;
    c.backend = backend;
    c.source = LongEdgeSource::oracle;
    c.env = &env;
    ExplorationResult r = run_exploration(c);
    const ExplorationState& st = r.state;
    const Torus t = p.torus();
    std::int64_t revealed = 0;
    for (VertexId a = 0; a < t.volume(); ++a) {
      for (VertexId b = a + 1; b < t.volume(); ++b) {
        const auto e = st.edge(t.point(a), t.point(b));
        if (!e) continue;
        ++revealed;
        CHECK(*e == env.has_edge(a, b));
      }
    }
    CHECK(revealed > 0);
    for (const WalkPath& path : st.paths) {
      for (const Point& u : path.sites) {
        std::vector<Point> expect;
        for (VertexId w : env.long_neighbors(env.id(u))) {
          if (st.distance(u, env.point(w)) > 4) expect.push_back(env.point(w));
        }
        std::vector<Point> got = st.long_neighbours(u);
        std::sort(expect.begin(), expect.end());
        std::sort(got.begin(), got.end());
        CHECK(got == expect);
        CHECK(st.degree(u) == env.degree(env.id(u)));
      }
    }
  }
}

TEST_CASE("walk replays on the revealed graph when no special phase starts") {
  ExplorationConfig c = lazy_config(1.0, 10, 6, 5);
  c.rho = Coord{1} << 30;  // no edge is long enough: no special phase
  ExplorationResult r = run_exploration(c);
  for (std::size_t w = 0; w < r.state.transcripts.size(); ++w) {
    REQUIRE(r.state.transcripts[w].long_edges.empty());
    const WalkPath again = run_walk(RevealedView{&r.state}, Point{}, std::int64_t{1} << 10,
                                    Stream(c.seed, Role::walk, {r.state.transcripts[w].ell}));
    CHECK(again.positions == r.state.paths[w].positions);
  }
}

TEST_CASE("mean number of w-field opens matches the tail series") {
  ExplorationConfig c = lazy_config(1.0, 12, 6, 6);
  ExplorationResult r = run_exploration(c);
  double sum = 0.0;
  std::int64_t n = 0;
  for (const WalkTranscript& t : r.state.transcripts) {
    for (const NewVertexRecord& nv : t.new_vertices) {
      sum += nv.w_opens;
      ++n;
    }
  }
  REQUIRE(n > 1000);
  const double expect = tail_series(c.params, r.scales.rho);
  // Opens are a sum of independent Bernoullis: variance below the mean.
  CHECK(std::abs(sum / n - expect) < 4.0 * std::sqrt(expect / n));
}

TEST_CASE("event scan: D implies A and the scan sees long edges") {
  ExplorationResult r = run_exploration(lazy_config(1.0, 11, 2, 7));
  for (std::size_t w = 0; w < r.state.paths.size(); ++w) {
    const EventReport e = event_scan(r.state, w);
    CHECK(e.D <= e.A);
    CHECK(e.G <= e.A);
    CHECK(e.G <= e.C);
    CHECK(e.A > 0.0);
    CHECK(e.coupling_success == r.state.transcripts[w].error_free());
  }
}

TEST_CASE("event scan on a materialized environment") {
  ModelParams p = line(1.8, 1.0, 4096);
  const Environment env = generate_environment(p, 31);
  const WalkPath path = run_walk(env, 0, 1024, Stream(31, Role::walk, {1}));
  const Scales sc = scale_parameters(10, 1.8, 1, 0.25, Coord{8});
  const EventReport e = event_scan(path, env, sc);
  CHECK(e.steps == 1024);
  CHECK(e.D <= e.A);
  CHECK_FALSE(e.coupling_success.has_value());

  auto nb = [&](const Point& s) {
    std::vector<Point> out;
    for (std::int64_t k = 0; k < env.degree(env.id(s)); ++k) out.push_back(env.point(env.neighbor(env.id(s), k)));
    return out;
  };
  auto off = [&](const Point& a, const Point& b) { return env.torus().displacement(a, b); };
  bool touches = false;
  for (const Point& u : path.sites) {
    for (const Point& y : nb(u)) touches |= sup_norm(off(u, y), 1) >= 8;
  }
  CHECK(long_edge_coincidence(path, path, nb, off, 1, 8) == touches);
  const WalkPath other = run_walk(env, 2048, 4, Stream(31, Role::walk, {2}));
  CHECK_FALSE(long_edge_coincidence(path, other, nb, off, 1, 1 << 20));
}

TEST_CASE("transcript JSON lines") {
  ExplorationResult r = run_exploration(lazy_config(1.0, 8, 2, 8));
  std::ostringstream out;
  write_transcript_jsonl(r.state, out);
  std::istringstream in(out.str());
  std::string line;
  std::int64_t count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("ell"));
    CHECK(j["pos"].size() == 1);
    CHECK(j["Bcode"].get<int>() <= 6);
    ++count;
  }
  CHECK(count == 2 * 256);
}

TEST_CASE("exploration reproduces under the same seed") {
  ExplorationResult a = run_exploration(lazy_config(1.0, 9, 2, 9));
  ExplorationResult b = run_exploration(lazy_config(1.0, 9, 2, 9));
  CHECK(a.state.paths[1].positions == b.state.paths[1].positions);
  CHECK(a.state.transcripts[1].errors == b.state.transcripts[1].errors);
}
