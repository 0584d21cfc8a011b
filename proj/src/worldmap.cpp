#include "hetpatrol/worldmap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

#include <fmt/core.h>

namespace hetpatrol::world {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string_view::npos) lines.pop_back();
  return lines;
}

std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(s, &used));
      return used == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
      return false;
    }
  } else {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  }
}

constexpr double kSqrt2 = 1.4142135623730951;

}  // namespace

GridMap::GridMap(int width, int height, double meters_per_cell, std::vector<std::uint8_t> occupied)
    : width_(width), height_(height), mpc_(meters_per_cell), occupied_(std::move(occupied)) {
  if (width_ < 1 || height_ < 1) throw MapError("map dimensions must be >= 1");
  if (!(mpc_ > 0.0) || !std::isfinite(mpc_)) throw MapError("meters_per_cell must be > 0");
  if (occupied_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw MapError("occupancy size does not match dimensions");
  }
  for (auto& c : occupied_) c = c ? 1 : 0;
  free_count_ = static_cast<std::size_t>(std::count(occupied_.begin(), occupied_.end(), 0));
  if (free_count_ == 0) throw MapError("map has no free cells");
}

Cell GridMap::cell_of(Position p) const {
  if (!in_bounds(p)) throw MapError(fmt::format("position ({}, {}) outside map", p.x, p.y));
  const int col = std::min(static_cast<int>(std::floor(p.x / mpc_)), width_ - 1);
  const int row = std::min(static_cast<int>(std::floor(p.y / mpc_)), height_ - 1);
  return {row, col};
}

GridMap load_map(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.size() < 2) throw MapError("malformed header: expected `mpc` and dimension lines");
  const auto h1 = tokens(lines[0]);
  double mpc = 0.0;
  if (h1.size() != 2 || h1[0] != "mpc" || !parse_number(h1[1], mpc) || !(mpc > 0.0)) {
    throw MapError("malformed header: expected `mpc <float>` with a positive value");
  }
  const auto h2 = tokens(lines[1]);
  int width = 0;
  int height = 0;
  if (h2.size() != 2 || !parse_number(h2[0], width) || !parse_number(h2[1], height) || width < 1 ||
      height < 1) {
    throw MapError("malformed header: expected `<width> <height>`");
  }
  if (lines.size() - 2 != static_cast<std::size_t>(height)) {
    throw MapError(fmt::format("expected {} rows, found {}", height, lines.size() - 2));
  }
  std::vector<std::uint8_t> occ;
  occ.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) {
    const std::string_view row = lines[2 + static_cast<std::size_t>(r)];
    if (row.size() != static_cast<std::size_t>(width)) {
      throw MapError(fmt::format("ragged row {}: length {} (expected {})", r, row.size(), width));
    }
    for (char c : row) {
      if (c == '.') {
        occ.push_back(0);
      } else if (c == '#') {
        occ.push_back(1);
      } else {
        throw MapError(fmt::format("unknown character '{}' in row {}", c, r));
      }
    }
  }
  return GridMap(width, height, mpc, std::move(occ));
}

std::string format_map(const GridMap& map) {
  std::string out = fmt::format("mpc {}\n{} {}\n", map.meters_per_cell(), map.width(), map.height());
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) out.push_back(map.occupied({r, c}) ? '#' : '.');
    out.push_back('\n');
  }
  return out;
}

PatrolGraph::PatrolGraph(std::vector<PatrolNode> nodes, std::vector<PatrolEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), adjacency_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes_.size(); ++j) {
      if (nodes_[i].id == nodes_[j].id) throw MapError(fmt::format("duplicate node id {}", nodes_[i].id));
    }
  }
  for (const auto& e : edges_) {
    if (e.a >= nodes_.size() || e.b >= nodes_.size()) throw MapError("edge references unknown node");
    if (e.a == e.b) throw MapError("self-loop edge");
    adjacency_[e.a].push_back({e.b, e.length});
    adjacency_[e.b].push_back({e.a, e.length});
  }
}

std::size_t PatrolGraph::index_of(int id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return i;
  }
  throw MapError(fmt::format("unknown node id {}", id));
}

bool PatrolGraph::connected() const {
  if (nodes_.empty()) return false;
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    for (const auto& nb : adjacency_[n]) {
      if (!seen[nb.node]) {
        seen[nb.node] = 1;
        ++count;
        stack.push_back(nb.node);
      }
    }
  }
  return count == nodes_.size();
}

PatrolGraph load_graph(std::string_view text, const GridMap& map) {
  std::vector<PatrolNode> nodes;
  std::vector<std::pair<int, int>> edge_ids;
  int line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    const auto tok = tokens(line);
    if (tok.empty() || tok[0].starts_with("//") || tok[0].starts_with(";")) continue;
    if (tok[0] == "node") {
      PatrolNode n;
      if (tok.size() != 4 || !parse_number(tok[1], n.id) || !parse_number(tok[2], n.pos.x) ||
          !parse_number(tok[3], n.pos.y)) {
        throw MapError(fmt::format("line {}: expected `node <id> <x> <y>`", line_no));
      }
      if (!map.free(n.pos)) throw MapError(fmt::format("node {} is not on a free cell", n.id));
      nodes.push_back(n);
    } else if (tok[0] == "edge") {
      int a = 0;
      int b = 0;
      if (tok.size() != 3 || !parse_number(tok[1], a) || !parse_number(tok[2], b)) {
        throw MapError(fmt::format("line {}: expected `edge <id_a> <id_b>`", line_no));
      }
      edge_ids.emplace_back(a, b);
    } else {
      throw MapError(fmt::format("line {}: unknown record `{}`", line_no, tok[0]));
    }
  }
  if (nodes.empty()) throw MapError("graph has no nodes");

  auto index_of = [&](int id) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].id == id) return i;
    }
    throw MapError(fmt::format("edge references unknown node id {}", id));
  };

  std::vector<PatrolEdge> edges;
  for (auto [a, b] : edge_ids) {
    PatrolEdge e{index_of(a), index_of(b), 0.0};
    for (const auto& other : edges) {
      if ((other.a == e.a && other.b == e.b) || (other.a == e.b && other.b == e.a)) {
        throw MapError(fmt::format("duplicate edge {}-{}", a, b));
      }
    }
    try {
      e.length = route(map, nodes[e.a].pos, nodes[e.b].pos).total_length;
    } catch (const NoRouteError&) {
      throw NoRouteError(fmt::format("edge {}-{} has no free route", a, b));
    }
    edges.push_back(e);
  }
  PatrolGraph graph(std::move(nodes), std::move(edges));
  if (!graph.connected()) throw MapError("patrol graph is not connected");
  return graph;
}

std::vector<Cell> supercover(Cell a, Cell b) {
  const int dx = b.col - a.col;
  const int dy = b.row - a.row;
  const int nx = std::abs(dx);
  const int ny = std::abs(dy);
  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;

  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(nx + ny + 1));
  Cell c = a;
  cells.push_back(c);
  for (int ix = 0, iy = 0; ix < nx || iy < ny;) {
    // Compare the parametric positions of the next vertical and horizontal
    // grid-line crossings, (0.5 + ix) / nx against (0.5 + iy) / ny.
    const long long decision =
        static_cast<long long>(1 + 2 * ix) * ny - static_cast<long long>(1 + 2 * iy) * nx;
    if (decision == 0) {
      cells.push_back({c.row, c.col + sx});
      cells.push_back({c.row + sy, c.col});
      c.col += sx;
      c.row += sy;
      ++ix;
      ++iy;
    } else if (decision < 0) {
      c.col += sx;
      ++ix;
    } else {
      c.row += sy;
      ++iy;
    }
    cells.push_back(c);
  }
  return cells;
}

int walls_crossed(const GridMap& map, Position a, Position b) {
  const Cell ca = map.cell_of(a);
  const Cell cb = map.cell_of(b);
  int walls = 0;
  for (const Cell& c : supercover(ca, cb)) {
    if (c == ca || c == cb) continue;
    if (map.occupied(c)) ++walls;
  }
  return walls;
}

namespace {

struct AstarScratch {
  std::vector<double> g;
  std::vector<std::int64_t> parent;
  std::vector<std::uint32_t> seen;
  std::vector<std::uint32_t> closed;
  std::uint32_t generation = 0;

  void prepare(std::size_t n) {
    if (g.size() != n) {
      g.assign(n, 0.0);
      parent.assign(n, -1);
      seen.assign(n, 0);
      closed.assign(n, 0);
      generation = 0;
    }
    if (++generation == 0) {
      std::fill(seen.begin(), seen.end(), 0);
      std::fill(closed.begin(), closed.end(), 0);
      generation = 1;
    }
  }
};

}  // namespace

Path astar(const GridMap& map, Position from, Position to) {
  if (!map.free(from)) throw MapError("astar: start is not on a free cell");
  if (!map.free(to)) throw MapError("astar: goal is not on a free cell");
  const Cell start = map.cell_of(from);
  const Cell goal = map.cell_of(to);
  if (start == goal) return {};

  const double mpc = map.meters_per_cell();
  const double diag = mpc * kSqrt2;
  auto heuristic = [&](Cell c) {
    const int dx = std::abs(c.col - goal.col);
    const int dy = std::abs(c.row - goal.row);
    return mpc * std::max(dx, dy) + (diag - mpc) * std::min(dx, dy);
  };

  thread_local AstarScratch s;
  s.prepare(map.cell_count());
  const std::uint32_t gen = s.generation;

  using Entry = std::tuple<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t start_idx = map.index(start);
  const std::size_t goal_idx = map.index(goal);
  s.g[start_idx] = 0.0;
  s.parent[start_idx] = -1;
  s.seen[start_idx] = gen;
  open.emplace(heuristic(start), start_idx);

  static constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  static constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};

  bool reached = false;
  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    if (s.closed[idx] == gen) continue;
    s.closed[idx] = gen;
    if (idx == goal_idx) {
      reached = true;
      break;
    }
    const Cell c = map.cell_at(idx);
    for (int k = 0; k < 8; ++k) {
      const Cell n{c.row + kDr[k], c.col + kDc[k]};
      if (!map.free(n)) continue;
      const bool diagonal = k >= 4;
      if (diagonal && (!map.free(Cell{c.row + kDr[k], c.col}) || !map.free(Cell{c.row, c.col + kDc[k]}))) {
        continue;
      }
      const std::size_t nidx = map.index(n);
      if (s.closed[nidx] == gen) continue;
      const double ng = s.g[idx] + (diagonal ? diag : mpc);
      if (s.seen[nidx] != gen || ng < s.g[nidx]) {
        s.seen[nidx] = gen;
        s.g[nidx] = ng;
        s.parent[nidx] = static_cast<std::int64_t>(idx);
        open.emplace(ng + heuristic(n), nidx);
      }
    }
  }
  if (!reached) throw NoRouteError("astar: no route between cells");

  std::vector<Position> rev;
  for (std::int64_t i = static_cast<std::int64_t>(goal_idx); i >= 0; i = s.parent[static_cast<std::size_t>(i)]) {
    rev.push_back(map.center(map.cell_at(static_cast<std::size_t>(i))));
  }
  Path path;
  path.waypoints.assign(rev.rbegin(), rev.rend());
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    path.total_length += distance(path.waypoints[i - 1], path.waypoints[i]);
  }
  return path;
}

Path route(const GridMap& map, Position from, Position to) {
  Path cells = astar(map, from, to);
  Path out;
  out.waypoints.push_back(from);
  if (cells.waypoints.size() > 2) {
    out.waypoints.insert(out.waypoints.end(), cells.waypoints.begin() + 1, cells.waypoints.end() - 1);
  }
  out.waypoints.push_back(to);
  for (std::size_t i = 1; i < out.waypoints.size(); ++i) {
    out.total_length += distance(out.waypoints[i - 1], out.waypoints[i]);
  }
  return out;
}

std::optional<Position> project_goal(const GridMap& map, Position current, Position proposed,
                                     bool repulsion_caused) {
  if (!map.in_bounds(proposed)) return std::nullopt;
  Cell c = map.cell_of(proposed);
  if (!map.occupied(c)) return proposed;
  if (repulsion_caused) return std::nullopt;

  const Vec2 dir = unit(proposed - current);
  if (dir.x == 0.0 && dir.y == 0.0) return std::nullopt;

  // Grid traversal along the ray starting at the proposal.
  const double mpc = map.meters_per_cell();
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_c = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  const int step_r = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
  double t_next_c = step_c > 0   ? ((c.col + 1) * mpc - proposed.x) / dir.x
                    : step_c < 0 ? (c.col * mpc - proposed.x) / dir.x
                                 : inf;
  double t_next_r = step_r > 0   ? ((c.row + 1) * mpc - proposed.y) / dir.y
                    : step_r < 0 ? (c.row * mpc - proposed.y) / dir.y
                                 : inf;
  const double dt_c = step_c != 0 ? mpc / std::abs(dir.x) : inf;
  const double dt_r = step_r != 0 ? mpc / std::abs(dir.y) : inf;

  while (true) {
    if (t_next_c < t_next_r) {
      c.col += step_c;
      t_next_c += dt_c;
    } else if (t_next_r < t_next_c) {
      c.row += step_r;
      t_next_r += dt_r;
    } else {
      // Exactly through a vertex: the ray only grazes the side cells.
      c.col += step_c;
      c.row += step_r;
      t_next_c += dt_c;
      t_next_r += dt_r;
    }
    if (!map.in_bounds(c)) return std::nullopt;
    if (!map.occupied(c)) return map.center(c);
  }
}

}  // namespace hetpatrol::world
