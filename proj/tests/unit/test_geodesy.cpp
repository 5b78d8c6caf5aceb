#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fpvgl/geodesy/geodesy.hpp"

using namespace fpvgl::geo;

namespace {

double dist(const Ecef& a, const Ecef& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}
double dist(const Enu& a, const Enu& b) {
  return std::sqrt((a.e - b.e) * (a.e - b.e) + (a.n - b.n) * (a.n - b.n) + (a.u - b.u) * (a.u - b.u));
}
double hdist(const Enu& a, const Enu& b) { return std::hypot(a.e - b.e, a.n - b.n); }

}  // namespace

TEST_CASE("geodetic_to_ecef axis cases") {
  const auto eq = geodetic_to_ecef({0, 0, 0});
  CHECK(std::abs(eq.x - 6378137.0) < 1e-6);
  CHECK(std::abs(eq.y) < 1e-6);
  CHECK(std::abs(eq.z) < 1e-6);

  // b = a(1 - f) evaluated independently of Ellipsoid::b()
  const double b = 6378137.0 * (1.0 - 1.0 / 298.257223563);
  const auto pole = geodetic_to_ecef({90, 0, 0});
  CHECK(std::abs(pole.x) < 1e-6);
  CHECK(std::abs(pole.y) < 1e-6);
  CHECK(std::abs(pole.z - b) < 1e-6);
  CHECK(std::abs(b - 6356752.314245) < 1e-5);

  const auto e90 = geodetic_to_ecef({0, 90, 0});
  CHECK(std::abs(e90.x) < 1e-6);
  CHECK(std::abs(e90.y - 6378137.0) < 1e-6);
}

TEST_CASE("ecef_to_geodetic inverse of the axis case") {
  const auto g = ecef_to_geodetic({6378137.0, 0, 0});
  CHECK(std::abs(g.lat) < 1e-9);
  CHECK(std::abs(g.lon) < 1e-9);
  CHECK(std::abs(g.alt) < 1e-6);

  const auto np = ecef_to_geodetic({0, 0, kWgs84.b() + 100.0});
  CHECK(std::abs(np.lat - 90.0) < 1e-9);
  CHECK(std::abs(np.alt - 100.0) < 1e-6);
}

TEST_CASE("ecef_to_geodetic rejects near-center points") {
  CHECK_THROWS_AS(ecef_to_geodetic({1.0, 0, 0}), GeodesyError);
  CHECK_THROWS_AS(ecef_to_geodetic({0, 0, 0}), GeodesyError);
}

TEST_CASE("forward/inverse round trip over random terrestrial points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180), alt(-5000, 50000);
  for (int i = 0; i < 2000; ++i) {
    const Geodetic p{lat(rng), lon(rng), alt(rng)};
    const auto q = geodetic_to_ecef(p);
    const auto back = geodetic_to_ecef(ecef_to_geodetic(q));
    CHECK(dist(q, back) < 1e-6);
  }
}

TEST_CASE("longitude stays in (-180, 180]") {
  const auto g = ecef_to_geodetic(geodetic_to_ecef({10, 180, 0}));
  CHECK(g.lon > 0);
  CHECK(std::abs(g.lon - 180.0) < 1e-9);
}

TEST_CASE("ENU: reference maps to origin; inverse pair") {
  const Geodetic ref{43.0009, -78.7873, 200.0};
  const auto o = ecef_to_enu(geodetic_to_ecef(ref), ref);
  CHECK(std::abs(o.e) < 1e-9);
  CHECK(std::abs(o.n) < 1e-9);
  CHECK(std::abs(o.u) < 1e-9);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-5000, 5000);
  for (int i = 0; i < 200; ++i) {
    const Ecef q = enu_to_ecef({d(rng), d(rng), d(rng) / 10}, ref);
    const auto back = enu_to_ecef(ecef_to_enu(q, ref), ref);
    CHECK(dist(q, back) < 1e-8);
  }
}

TEST_CASE("ENU: 100 m along the parallel reads as due east") {
  // Small-offset oracle: an arc of length s along the parallel at latitude
  // phi spans dlon = s / (N(phi) cos(phi)).
  const Geodetic ref{43.0009, -78.7873, 200.0};
  const double phi = ref.lat * std::numbers::pi / 180.0;
  const double a = 6378137.0, f = 1.0 / 298.257223563, e2 = f * (2 - f);
  const double n = a / std::sqrt(1 - e2 * std::sin(phi) * std::sin(phi));
  const double dlon = 100.0 / ((n + ref.alt) * std::cos(phi)) * 180.0 / std::numbers::pi;
  const auto v = geodetic_to_enu({ref.lat, ref.lon + dlon, ref.alt}, ref);
  CHECK(std::abs(v.e - 100.0) < 1e-3);
  CHECK(std::abs(v.n) < 0.01);
  CHECK(std::abs(v.u) < 0.01);
}

TEST_CASE("align_to_east") {
  SUBCASE("quarter turn") {
    const std::vector<Enu> track{{0, 10, 0}, {1, 0, 5}};
    const auto out = align_to_east(track, {0, 10, 0});
    CHECK(out[0].e == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(std::abs(out[0].n) < 1e-12);
    CHECK(std::abs(out[1].e) < 1e-12);
    CHECK(out[1].n == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(out[1].u == 5.0);
  }
  SUBCASE("3-4-5 reference") {
    const std::vector<Enu> track{{3, 4, 2}};
    const auto out = align_to_east(track, {3, 4, 2});
    CHECK(out[0].e == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(std::abs(out[0].n) < 1e-12);
    CHECK(out[0].u == 2.0);
  }
  SUBCASE("undefined bearing") {
    const std::vector<Enu> track{{1, 1, 1}};
    CHECK_THROWS_AS(align_to_east(track, {0, 0, 7}), GeodesyError);
  }
  SUBCASE("isometry and idempotence") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(-50, 50);
    std::vector<Enu> track(60);
    for (auto& p : track) p = {d(rng), d(rng), d(rng)};
    const Enu ref{d(rng), d(rng), 0};
    const auto out = align_to_east(track, ref);
    for (std::size_t i = 0; i < track.size(); ++i) {
      for (std::size_t j = i + 1; j < track.size(); ++j) {
        const double before = dist(track[i], track[j]);
        CHECK(std::abs(dist(out[i], out[j]) - before) <= 1e-9 * before);
        CHECK(std::abs(hdist(out[i], out[j]) - hdist(track[i], track[j])) <= 1e-9 * before);
      }
    }
    const auto aligned_ref = rotate_about_up(ref, -horizontal_bearing(ref));
    const auto again = align_to_east(out, aligned_ref);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(dist(again[i], out[i]) < 1e-9);
  }
}

TEST_CASE("from_scaled") {
  const auto g = from_scaled(430009000, -787873000, 200500);
  CHECK(g.lat == doctest::Approx(43.0009));
  CHECK(g.lon == doctest::Approx(-78.7873));
  CHECK(g.alt == doctest::Approx(200.5));
}
