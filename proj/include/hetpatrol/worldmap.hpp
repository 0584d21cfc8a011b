#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hetpatrol/geometry.hpp"

namespace hetpatrol::world {

/// Raised for malformed map or graph input and for invalid geometric queries.
class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by astar when the two cells are in different free components.
class NoRouteError : public MapError {
 public:
  using MapError::MapError;
};

struct Cell {
  int row = 0;
  int col = 0;
  friend constexpr auto operator<=>(Cell, Cell) = default;
};

/// Occupancy grid. Cell (row, col) spans [col*mpc, (col+1)*mpc) x [row*mpc, (row+1)*mpc).
class GridMap {
 public:
  GridMap(int width, int height, double meters_per_cell, std::vector<std::uint8_t> occupied);

  int width() const { return width_; }
  int height() const { return height_; }
  double meters_per_cell() const { return mpc_; }
  std::size_t cell_count() const { return occupied_.size(); }
  std::size_t free_count() const { return free_count_; }

  bool in_bounds(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_; }
  bool in_bounds(Position p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x < width_ * mpc_ && p.y < height_ * mpc_;
  }
  bool occupied(Cell c) const { return occupied_[index(c)] != 0; }
  bool free(Cell c) const { return in_bounds(c) && occupied_[index(c)] == 0; }
  bool free(Position p) const { return in_bounds(p) && free(cell_of(p)); }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.col);
  }
  Cell cell_at(std::size_t index) const {
    return {static_cast<int>(index / static_cast<std::size_t>(width_)),
            static_cast<int>(index % static_cast<std::size_t>(width_))};
  }
  Cell cell_of(Position p) const;
  Position center(Cell c) const { return {(c.col + 0.5) * mpc_, (c.row + 0.5) * mpc_}; }

  std::span<const std::uint8_t> occupancy() const { return occupied_; }

 private:
  int width_;
  int height_;
  double mpc_;
  std::vector<std::uint8_t> occupied_;
  std::size_t free_count_ = 0;
};

/// Parses the text map format: `mpc <float>`, `<width> <height>`, then
/// `height` rows of `width` characters ('.' free, '#' occupied).
GridMap load_map(std::string_view text);

/// Inverse of load_map.
std::string format_map(const GridMap& map);

/// Cell-center polyline produced by astar.
struct Path {
  std::vector<Position> waypoints;
  double total_length = 0.0;
};

struct PatrolNode {
  int id = 0;
  Position pos;
};

struct PatrolEdge {
  std::size_t a = 0;  // node indices
  std::size_t b = 0;
  double length = 0.0;
};

/// Undirected patrol route. Nodes are addressed by index internally; ids are
/// the labels used in graph files.
class PatrolGraph {
 public:
  struct Neighbor {
    std::size_t node;
    double length;
  };

  PatrolGraph(std::vector<PatrolNode> nodes, std::vector<PatrolEdge> edges);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<PatrolNode>& nodes() const { return nodes_; }
  const std::vector<PatrolEdge>& edges() const { return edges_; }
  const PatrolNode& node(std::size_t index) const { return nodes_.at(index); }
  std::span<const Neighbor> neighbors(std::size_t index) const { return adjacency_.at(index); }
  std::size_t index_of(int id) const;
  bool connected() const;

 private:
  std::vector<PatrolNode> nodes_;
  std::vector<PatrolEdge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// Parses `node <id> <x> <y>` / `edge <a> <b>` lines. Edge lengths are A*
/// path lengths over `map`. Validates free node cells, unique ids and
/// connectivity.
PatrolGraph load_graph(std::string_view text, const GridMap& map);

/// Cells touched by the segment between the centers of a and b, in traversal
/// order, endpoints included. When the segment passes exactly through a grid
/// vertex both side cells are reported, which keeps the set symmetric in a, b.
std::vector<Cell> supercover(Cell a, Cell b);

/// Occupied cells on the supercover line between the cells of a and b,
/// excluding the two endpoint cells.
int walls_crossed(const GridMap& map, Position a, Position b);

/// Minimal-cost 8-connected route (axial step = mpc, diagonal = mpc*sqrt(2),
/// no corner cutting). Waypoints are the centers of every cell on the route,
/// starting cell included; same-cell queries return an empty path.
Path astar(const GridMap& map, Position from, Position to);

/// Walkable polyline from `from` to `to`: the astar cell route with its two
/// endpoint cell centers replaced by the exact endpoints. Every segment stays
/// inside free cells, and total_length >= distance(from, to).
Path route(const GridMap& map, Position from, Position to);

/// Goal projection shared by the search algorithms. Returns the proposal if
/// its cell is free; otherwise nullopt (stay still) when the proposal came
/// from repulsion, else the center of the first free cell beyond the
/// obstacle along the ray from current through proposed (nullopt if the ray
/// leaves the map first).
std::optional<Position> project_goal(const GridMap& map, Position current, Position proposed,
                                     bool repulsion_caused);

}  // namespace hetpatrol::world
