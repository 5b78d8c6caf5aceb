#include "fpvgl/geodesy/geodesy.hpp"

#include <cmath>
#include <numbers>

namespace fpvgl::geo {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Basis {
  double sl, cl, so, co;  // sin/cos of lat and lon
};

Basis basis(const Geodetic& ref) {
  return {std::sin(ref.lat * kDeg), std::cos(ref.lat * kDeg), std::sin(ref.lon * kDeg),
          std::cos(ref.lon * kDeg)};
}

}  // namespace

Geodetic from_scaled(std::int64_t lat_1e7, std::int64_t lon_1e7, std::int64_t alt_mm) noexcept {
  return {static_cast<double>(lat_1e7) * 1e-7, static_cast<double>(lon_1e7) * 1e-7,
          static_cast<double>(alt_mm) * 1e-3};
}

Ecef geodetic_to_ecef(const Geodetic& p, const Ellipsoid& ell) {
  const double sl = std::sin(p.lat * kDeg), cl = std::cos(p.lat * kDeg);
  const double so = std::sin(p.lon * kDeg), co = std::cos(p.lon * kDeg);
  const double e2 = ell.e2();
  const double n = ell.a / std::sqrt(1.0 - e2 * sl * sl);
  return {(n + p.alt) * cl * co, (n + p.alt) * cl * so, (n * (1.0 - e2) + p.alt) * sl};
}

Geodetic ecef_to_geodetic(const Ecef& q, const Ellipsoid& ell) {
  const double r = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  if (!(r >= ell.a / 2)) {
    throw GeodesyError("ecef_to_geodetic: point too close to the Earth's center");
  }
  const double a = ell.a, b = ell.b(), e2 = ell.e2();
  const double ep2 = e2 / (1.0 - e2);
  const double p = std::hypot(q.x, q.y);

  double beta = std::atan2(q.z * a, p * b);
  double lat = 0;
  for (int pass = 0; pass < 3; ++pass) {
    const double sb = std::sin(beta), cb = std::cos(beta);
    lat = std::atan2(q.z + ep2 * b * sb * sb * sb, p - e2 * a * cb * cb * cb);
    beta = std::atan2((1.0 - ell.f) * std::sin(lat), std::cos(lat));
  }

  const double sl = std::sin(lat), cl = std::cos(lat);
  const double h = p * cl + q.z * sl - a * std::sqrt(1.0 - e2 * sl * sl);
  double lon = std::atan2(q.y, q.x) / kDeg;
  if (lon <= -180.0) lon += 360.0;
  return {lat / kDeg, lon, h};
}

Enu ecef_to_enu(const Ecef& q, const Geodetic& ref, const Ellipsoid& ell) {
  const Ecef o = geodetic_to_ecef(ref, ell);
  const double dx = q.x - o.x, dy = q.y - o.y, dz = q.z - o.z;
  const auto [sl, cl, so, co] = basis(ref);
  return {-so * dx + co * dy, -sl * co * dx - sl * so * dy + cl * dz,
          cl * co * dx + cl * so * dy + sl * dz};
}

Ecef enu_to_ecef(const Enu& v, const Geodetic& ref, const Ellipsoid& ell) {
  const Ecef o = geodetic_to_ecef(ref, ell);
  const auto [sl, cl, so, co] = basis(ref);
  return {o.x - so * v.e - sl * co * v.n + cl * co * v.u,
          o.y + co * v.e - sl * so * v.n + cl * so * v.u, o.z + cl * v.n + sl * v.u};
}

Enu geodetic_to_enu(const Geodetic& p, const Geodetic& ref, const Ellipsoid& ell) {
  return ecef_to_enu(geodetic_to_ecef(p, ell), ref, ell);
}

Geodetic enu_to_geodetic(const Enu& v, const Geodetic& ref, const Ellipsoid& ell) {
  return ecef_to_geodetic(enu_to_ecef(v, ref, ell), ell);
}

double horizontal_bearing(const Enu& v) {
  if (v.e == 0.0 && v.n == 0.0) {
    throw GeodesyError("reference point has no horizontal offset; bearing undefined");
  }
  return std::atan2(v.n, v.e);
}

Enu rotate_about_up(const Enu& v, double angle_rad) noexcept {
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  return {c * v.e - s * v.n, s * v.e + c * v.n, v.u};
}

std::vector<Enu> align_to_east(std::span<const Enu> track, const Enu& reference_point) {
  const double angle = -horizontal_bearing(reference_point);
  std::vector<Enu> out;
  out.reserve(track.size());
  for (const auto& p : track) out.push_back(rotate_about_up(p, angle));
  return out;
}

}  // namespace fpvgl::geo
