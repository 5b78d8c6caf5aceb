#pragma once

// Geodetic <-> ECEF <-> ENU conversions on a reference ellipsoid, and the
// rotation that lays a trajectory onto the due-east axis.
//
// Constants: WGS-84, a = 6378137.0 m, 1/f = 298.257223563.
// Angles at the public surface are degrees; everything else is SI.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fpvgl::geo {

struct Ellipsoid {
  double a = 6378137.0;
  double f = 1.0 / 298.257223563;

  double b() const noexcept { return a * (1.0 - f); }
  double e2() const noexcept { return f * (2.0 - f); }
};

inline constexpr Ellipsoid kWgs84{};

struct Geodetic {
  double lat = 0;  // deg
  double lon = 0;  // deg
  double alt = 0;  // m above ellipsoid

  bool operator==(const Geodetic&) const = default;
};

struct Ecef {
  double x = 0, y = 0, z = 0;

  bool operator==(const Ecef&) const = default;
};

struct Enu {
  double e = 0, n = 0, u = 0;

  bool operator==(const Enu&) const = default;
};

class GeodesyError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Scaled integer GPS (1e-7 deg, mm) to SI.
Geodetic from_scaled(std::int64_t lat_1e7, std::int64_t lon_1e7, std::int64_t alt_mm) noexcept;

Ecef geodetic_to_ecef(const Geodetic& p, const Ellipsoid& ell = kWgs84);

/// Bowring's closed form followed by two refinement passes.
/// Throws GeodesyError when |q| < a/2 (no meaningful surface projection).
Geodetic ecef_to_geodetic(const Ecef& q, const Ellipsoid& ell = kWgs84);

Enu ecef_to_enu(const Ecef& q, const Geodetic& ref, const Ellipsoid& ell = kWgs84);
Ecef enu_to_ecef(const Enu& v, const Geodetic& ref, const Ellipsoid& ell = kWgs84);

Enu geodetic_to_enu(const Geodetic& p, const Geodetic& ref, const Ellipsoid& ell = kWgs84);
Geodetic enu_to_geodetic(const Enu& v, const Geodetic& ref, const Ellipsoid& ell = kWgs84);

/// Heading (radians, counter-clockwise from +E) of the horizontal part of `v`.
/// Throws GeodesyError if the horizontal part is zero.
double horizontal_bearing(const Enu& v);

/// Rotates about Up so that the bearing of `reference_point` maps onto +E.
Enu rotate_about_up(const Enu& v, double angle_rad) noexcept;
std::vector<Enu> align_to_east(std::span<const Enu> track, const Enu& reference_point);

}  // namespace fpvgl::geo
