#include "tandepth/geodesy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tandepth/error.hpp"
#include "tandepth/log.hpp"

namespace tandepth {

namespace {

constexpr double kA = 6378137.0;               // WGS84 semi-major axis
constexpr double kF = 1.0 / 298.257223563;     // WGS84 flattening
constexpr double kK0 = 0.9996;
constexpr double kFalseEasting = 500000.0;
constexpr double kFalseNorthingSouth = 10000000.0;
constexpr double kDeg = M_PI / 180.0;

}  // namespace

UtmZone utm_zone_for(double latitude, double longitude) {
  int number = static_cast<int>(std::floor((longitude + 180.0) / 6.0)) + 1;
  if (number < 1) number = 1;
  if (number > 60) number = 60;
  return {number, latitude < 0.0};
}

std::pair<double, double> geodetic_to_utm(const GeodeticPoint& p, const UtmZone& zone) {
  if (!std::isfinite(p.latitude) || !std::isfinite(p.longitude) || std::abs(p.latitude) > 90.0 ||
      std::abs(p.longitude) > 180.0)
    raise(Errc::ConfigError, "geodetic point out of range (" + std::to_string(p.latitude) + ", " +
                                 std::to_string(p.longitude) + ")");
  if (std::abs(p.latitude) > 84.0)
    raise(Errc::UnsupportedLatitude, "latitude " + std::to_string(p.latitude) +
                                         " outside the UTM band [-84, 84]");

  double lon0 = zone.central_meridian_deg();
  double dlon = p.longitude - lon0;
  if (std::abs(dlon) > 6.0)
    log_warn("zone " + std::to_string(zone.number) + " does not cover longitude " +
             std::to_string(p.longitude));

  const double n = kF / (2.0 - kF);
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n;
  const double big_a = kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0);
  const double alpha[4] = {
      n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0,
      13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0,
      61.0 * n3 / 240.0 - 103.0 * n4 / 140.0,
      49561.0 * n4 / 161280.0,
  };

  double phi = p.latitude * kDeg;
  double lam = dlon * kDeg;
  double sphi = std::sin(phi);
  double c = 2.0 * std::sqrt(n) / (1.0 + n);
  double t = std::sinh(std::atanh(sphi) - c * std::atanh(c * sphi));
  double xi = std::atan2(t, std::cos(lam));
  double eta = std::asinh(std::sin(lam) / std::sqrt(t * t + std::cos(lam) * std::cos(lam)));

  double xs = xi;
  double es = eta;
  for (int j = 1; j <= 4; ++j) {
    xs += alpha[j - 1] * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
    es += alpha[j - 1] * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
  }

  double easting = kFalseEasting + kK0 * big_a * es;
  double northing = kK0 * big_a * xs + (zone.south ? kFalseNorthingSouth : 0.0);
  return {easting, northing};
}

double altitude_sync(double reference_height, const Eigen::Vector2d& reference_xy,
                     const std::vector<Eigen::Vector3d>& gdem, double r_sync) {
  double best_d2 = std::numeric_limits<double>::infinity();
  size_t best = gdem.size();
  for (size_t i = 0; i < gdem.size(); ++i) {
    double dx = gdem[i].x() - reference_xy.x();
    double dy = gdem[i].y() - reference_xy.y();
    double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  if (best == gdem.size() || best_d2 > r_sync * r_sync)
    raise(Errc::SyncPointNotFound,
          "no GDEM point within " + std::to_string(r_sync) + " m of the reference position");
  return gdem[best].z() - reference_height;
}

}  // namespace tandepth
