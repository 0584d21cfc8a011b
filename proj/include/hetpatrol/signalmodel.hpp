#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hetpatrol/geometry.hpp"
#include "hetpatrol/worldmap.hpp"

namespace hetpatrol::signal {

inline constexpr double kSpeedOfLight = 299'792'458.0;

class SignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SignalParams {
  double tx_power_dbm = 20.0;
  double frequency_hz = 2.4e9;
  double wall_attenuation_db = 4.0;
  double found_threshold_dbm = -20.0;
  double detection_floor_dbm = -90.0;

  void validate() const;
  friend bool operator==(const SignalParams&, const SignalParams&) = default;
};

/// Free-space loss plus a fixed attenuation per crossed wall, in dB.
double path_loss(double distance_m, int walls, const SignalParams& params);

/// Received strength for a given loss: tx_power - loss.
inline double rssi_at(const SignalParams& params, double loss_db) { return params.tx_power_dbm - loss_db; }

/// RSSI raster for one emitter location. Occupied cells carry no value.
/// Values are quantized to 1e-4 dB so the cache file round-trips exactly.
class SignalMap {
 public:
  SignalMap(Position source, SignalParams params, int width, int height, double meters_per_cell,
            std::vector<double> rssi);

  Position source() const { return source_; }
  const SignalParams& params() const { return params_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double meters_per_cell() const { return mpc_; }

  /// nullopt for occupied cells.
  std::optional<double> rssi(world::Cell c) const;
  double max_rssi() const;
  double min_rssi() const;
  std::size_t cells_at_or_above(double dbm) const;
  const std::vector<double>& values() const { return rssi_; }

 private:
  Position source_;
  SignalParams params_;
  int width_;
  int height_;
  double mpc_;
  std::vector<double> rssi_;  // NaN marks occupied cells
};

/// Evaluates the model at every free cell center. Distances are clamped to
/// mpc/2 so the source cell stays finite.
SignalMap build_signal_map(const world::GridMap& map, Position source, const SignalParams& params);

/// RSSI of the cell containing `at`, or nullopt when below the detection floor.
/// Throws SignalError for out-of-bounds or occupied positions.
std::optional<double> sample_rssi(const SignalMap& sm, Position at);

/// Cache file text: `source x y`, `params tx f wall found floor`, then one
/// row per grid row (fixed 4-decimal dBm values, `X` for occupied).
std::string format_signal_map(const SignalMap& sm);

/// Parses a cache file; the occupancy must match `map`.
SignalMap parse_signal_map(std::string_view text, const world::GridMap& map);

}  // namespace hetpatrol::signal
