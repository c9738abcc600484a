#include "lrp/snapshot.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lrp {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

void write_snapshot(const Environment& env, std::ostream& out) {
  const ModelParams& p = env.params();
  out << "LRPENV 1 d=" << p.d << " s=" << format_double(p.s) << " beta=" << format_double(p.beta)
      << " L=" << p.L << " nn=" << (p.nn_prob_one ? 1 : 0) << " norm=" << to_string(p.norm)
      << " seed=" << env.seed();
  if (p.boundary == Boundary::free) out << " boundary=free";
  out << '\n';
  std::vector<std::pair<Point, Point>> lines;
  for (const auto& [u, w] : env.stored_edges()) {
    Point a = env.point(u), b = env.point(w);
    if (b < a) std::swap(a, b);
    lines.emplace_back(a, b);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [a, b] : lines) {
    for (int i = 0; i < p.d; ++i) out << (i ? " " : "") << a[i];
    out << ' ';
    for (int i = 0; i < p.d; ++i) out << ' ' << b[i];
    out << '\n';
  }
}

Environment read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("snapshot: missing header");
  std::istringstream hs(line);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "LRPENV" || version != "1") throw std::runtime_error("snapshot: bad magic");
  std::map<std::string, std::string> kv;
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error("snapshot: bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto need = [&](const char* k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw std::runtime_error(std::string("snapshot: header lacks ") + k);
    return it->second;
  };
  ModelParams p;
  p.d = std::stoi(need("d"));
  p.s = parse_double(need("s"));
  p.beta = parse_double(need("beta"));
  p.L = std::stoll(need("L"));
  p.nn_prob_one = need("nn") == "1";
  p.norm = parse_norm(need("norm"));
  p.boundary = kv.count("boundary") ? parse_boundary(kv["boundary"]) : Boundary::torus;
  const std::uint64_t seed = std::stoull(need("seed"));
  p.validate();
  const Torus t = p.torus();
  std::vector<Edge> edges;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Point a, b;
    for (int i = 0; i < p.d; ++i) ls >> a[i];
    for (int i = 0; i < p.d; ++i) ls >> b[i];
    if (!ls) throw std::runtime_error("snapshot: malformed edge on line " + std::to_string(lineno));
    edges.emplace_back(t.index(a), t.index(b));
  }
  return Environment(p, seed, std::move(edges));
}

void save_snapshot(const Environment& env, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_snapshot(env, out);
}

Environment load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_snapshot(in);
}

}  // namespace lrp
