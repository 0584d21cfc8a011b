#include "hetpatrol/signalmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <fmt/core.h>

#include "hetpatrol/simd/kernels.hpp"

namespace hetpatrol::signal {

namespace {

double quantize(double v) { return std::round(v * 1e4) / 1e4; }

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

void SignalParams::validate() const {
  if (!(frequency_hz > 0.0)) throw SignalError("frequency must be > 0");
  if (!(wall_attenuation_db >= 0.0)) throw SignalError("wall attenuation must be >= 0");
  if (!(detection_floor_dbm < found_threshold_dbm)) {
    throw SignalError("detection floor must be below the found threshold");
  }
}

double path_loss(double distance_m, int walls, const SignalParams& params) {
  if (!(distance_m > 0.0)) throw SignalError("path_loss: distance must be > 0");
  if (walls < 0) throw SignalError("path_loss: negative wall count");
  const double free_space = 20.0 * std::log10(distance_m) + 20.0 * std::log10(params.frequency_hz) +
                            20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight);
  return free_space + walls * params.wall_attenuation_db;
}

SignalMap::SignalMap(Position source, SignalParams params, int width, int height, double meters_per_cell,
                     std::vector<double> rssi)
    : source_(source), params_(params), width_(width), height_(height), mpc_(meters_per_cell), rssi_(std::move(rssi)) {
  params_.validate();
  if (rssi_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw SignalError("rssi raster size does not match dimensions");
  }
}

std::optional<double> SignalMap::rssi(world::Cell c) const {
  if (c.row < 0 || c.col < 0 || c.row >= height_ || c.col >= width_) return std::nullopt;
  const double v = rssi_[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.col)];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

double SignalMap::max_rssi() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : rssi_) {
    if (!std::isnan(v)) m = std::max(m, v);
  }
  return m;
}

double SignalMap::min_rssi() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : rssi_) {
    if (!std::isnan(v)) m = std::min(m, v);
  }
  return m;
}

std::size_t SignalMap::cells_at_or_above(double dbm) const {
  return static_cast<std::size_t>(std::count_if(rssi_.begin(), rssi_.end(), [&](double v) { return v >= dbm; }));
}

SignalMap build_signal_map(const world::GridMap& map, Position source, const SignalParams& params) {
  params.validate();
  if (!map.free(source)) throw SignalError("signal source must lie on a free cell");

  const std::size_t n = map.cell_count();
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Position c = map.center(map.cell_at(i));
    xs[i] = c.x;
    ys[i] = c.y;
  }
  std::vector<double> dist(n);
  simd::distance_field(xs, ys, source.x, source.y, map.meters_per_cell() / 2.0, dist);

  std::vector<double> rssi(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const world::Cell c = map.cell_at(i);
    if (map.occupied(c)) continue;
    const int walls = world::walls_crossed(map, {xs[i], ys[i]}, source);
    rssi[i] = quantize(rssi_at(params, path_loss(dist[i], walls, params)));
  }
  return SignalMap(source, params, map.width(), map.height(), map.meters_per_cell(), std::move(rssi));
}

std::optional<double> sample_rssi(const SignalMap& sm, Position at) {
  if (!(at.x >= 0.0 && at.y >= 0.0 && at.x < sm.width() * sm.meters_per_cell() &&
        at.y < sm.height() * sm.meters_per_cell())) {
    throw SignalError(fmt::format("sample_rssi: ({}, {}) outside map", at.x, at.y));
  }
  const world::Cell c{std::min(static_cast<int>(std::floor(at.y / sm.meters_per_cell())), sm.height() - 1),
                      std::min(static_cast<int>(std::floor(at.x / sm.meters_per_cell())), sm.width() - 1)};
  const auto v = sm.rssi(c);
  if (!v) throw SignalError(fmt::format("sample_rssi: ({}, {}) is on an occupied cell", at.x, at.y));
  if (*v < sm.params().detection_floor_dbm) return std::nullopt;
  return v;
}

std::string format_signal_map(const SignalMap& sm) {
  const SignalParams& p = sm.params();
  std::string out = fmt::format("source {:.4f} {:.4f}\n", sm.source().x, sm.source().y);
  out += fmt::format("params {:.4f} {:.4f} {:.4f} {:.4f} {:.4f}\n", p.tx_power_dbm, p.frequency_hz,
                     p.wall_attenuation_db, p.found_threshold_dbm, p.detection_floor_dbm);
  for (int r = 0; r < sm.height(); ++r) {
    for (int c = 0; c < sm.width(); ++c) {
      if (c > 0) out.push_back(' ');
      const auto v = sm.rssi({r, c});
      if (v) {
        out += fmt::format("{:.4f}", *v);
      } else {
        out.push_back('X');
      }
    }
    out.push_back('\n');
  }
  return out;
}

SignalMap parse_signal_map(std::string_view text, const world::GridMap& map) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) throw SignalError(fmt::format("signal map: missing {}", what));
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next_line("source line");
  Position source;
  {
    std::istringstream ls(line);
    std::string key;
    std::string xs;
    std::string ys;
    std::string extra;
    if (!(ls >> key >> xs >> ys) || key != "source" || (ls >> extra) || !parse_double(xs, source.x) ||
        !parse_double(ys, source.y)) {
      throw SignalError("signal map: malformed `source <x> <y>` line");
    }
  }
  next_line("params line");
  SignalParams params;
  {
    std::istringstream ls(line);
    std::string key;
    std::string v[5];
    std::string extra;
    if (!(ls >> key >> v[0] >> v[1] >> v[2] >> v[3] >> v[4]) || key != "params" || (ls >> extra) ||
        !parse_double(v[0], params.tx_power_dbm) || !parse_double(v[1], params.frequency_hz) ||
        !parse_double(v[2], params.wall_attenuation_db) || !parse_double(v[3], params.found_threshold_dbm) ||
        !parse_double(v[4], params.detection_floor_dbm)) {
      throw SignalError("signal map: malformed `params` line");
    }
  }

  std::vector<double> rssi;
  rssi.reserve(map.cell_count());
  for (int r = 0; r < map.height(); ++r) {
    next_line("raster row");
    std::istringstream ls(line);
    std::string tok;
    int c = 0;
    while (ls >> tok) {
      if (c >= map.width()) throw SignalError(fmt::format("signal map: row {} too long", r));
      const bool occupied = map.occupied({r, c});
      if (tok == "X") {
        if (!occupied) throw SignalError(fmt::format("signal map: cell ({}, {}) should be free", r, c));
        rssi.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        double v = 0.0;
        if (!parse_double(tok, v)) throw SignalError(fmt::format("signal map: bad value `{}`", tok));
        if (occupied) throw SignalError(fmt::format("signal map: cell ({}, {}) should be occupied", r, c));
        rssi.push_back(v);
      }
      ++c;
    }
    if (c != map.width()) throw SignalError(fmt::format("signal map: row {} has {} values", r, c));
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw SignalError("signal map: trailing data");
  }
  return SignalMap(source, params, map.width(), map.height(), map.meters_per_cell(), std::move(rssi));
}

}  // namespace hetpatrol::signal
