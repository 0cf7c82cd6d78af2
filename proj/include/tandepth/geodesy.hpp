#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace tandepth {

struct GeodeticPoint {
  double latitude;   // degrees, WGS84
  double longitude;  // degrees, WGS84
  double altitude;   // meters, vertical datum of the source GDEM
};

struct GlobalShift {
  double shift_x = 0.0;
  double shift_y = 0.0;
  double shift_z = 0.0;
};

struct UtmZone {
  int number = 0;  // 1..60
  bool south = false;
  double central_meridian_deg() const { return number * 6.0 - 183.0; }
};

// Zone containing the given longitude (hemisphere from latitude sign).
UtmZone utm_zone_for(double latitude, double longitude);

// WGS84 geodetic -> UTM easting/northing, Krueger series truncated at n^4.
// Scale factor 0.9996, false easting 500 km, false northing 10^7 m south.
// Throws UnsupportedLatitude outside [-84, 84]; logs a warning when the
// requested zone does not cover the longitude.
std::pair<double, double> geodetic_to_utm(const GeodeticPoint& p, const UtmZone& zone);

inline Eigen::Vector3d apply_global_shift(double easting, double northing, double altitude,
                                          const GlobalShift& shift) {
  return {easting - shift.shift_x, northing - shift.shift_y, altitude - shift.shift_z};
}

// Vertical offset between the GDEM datum and a relative altitude reading:
// altitude of the horizontally nearest GDEM point minus reference_height.
// Nearest by 2D distance, ties broken by lowest index. Throws
// SyncPointNotFound when no point lies within r_sync of reference_xy.
double altitude_sync(double reference_height, const Eigen::Vector2d& reference_xy,
                     const std::vector<Eigen::Vector3d>& gdem, double r_sync = 50.0);

}  // namespace tandepth
