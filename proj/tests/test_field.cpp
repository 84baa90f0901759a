#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "riskplan/field.hpp"
#include "test_util.hpp"

using namespace riskplan;
using namespace riskplan::testutil;

namespace {

// Parameter set that makes the hand-frozen scalar cases below come out in
// round numbers (unit gain, unit exponent).
PotentialParams UnitGainParams() {
  PotentialParams pp;
  pp.k = 1.0;
  pp.r_a = 1.0;
  pp.k1 = 1.0;
  pp.e_max = 100.0;
  pp.t_scale = 1.0;
  pp.alpha = 0.1;
  pp.beta = 1.0;
  pp.gamma = 1.0;
  pp.cutoff = 1000.0;
  return pp;
}

}  // namespace

TEST_CASE("virtual mass scalar cases") {
  PotentialParams pp = UnitGainParams();
  CHECK(VirtualMass(1500.0, 0.0, pp) == 1500.0);  // zero speed leaves only gamma
  CHECK(VirtualMass(1000.0, 10.0, pp) == doctest::Approx(2000.0).epsilon(1e-12));

  pp.beta = 2.0;  // doubling speed quadruples the speed-dependent term
  const double m = 800.0;
  const double base = m * pp.t_scale * pp.gamma;
  const double term1 = VirtualMass(m, 3.0, pp) - base;
  const double term2 = VirtualMass(m, 6.0, pp) - base;
  CHECK(term2 == doctest::Approx(4.0 * term1).epsilon(1e-9));
}

TEST_CASE("virtual mass is positive and increasing in speed") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> mass(1.0, 50000.0);
  std::uniform_real_distribution<double> speed(0.0, 60.0);
  std::uniform_real_distribution<double> beta(1.0, 2.5);
  for (int i = 0; i < 10000; ++i) {
    PotentialParams pp = UnitGainParams();
    pp.beta = beta(rng);
    const double m = mass(rng);
    double v1 = speed(rng);
    double v2 = speed(rng);
    if (v1 > v2) std::swap(v1, v2);
    const double mv1 = VirtualMass(m, v1, pp);
    const double mv2 = VirtualMass(m, v2, pp);
    CHECK(mv1 > 0.0);
    if (v2 - v1 > 1e-9) CHECK(mv2 > mv1);
  }
}

TEST_CASE("potential energy scalar cases") {
  const PotentialParams pp = UnitGainParams();
  // D = 100 with M_v = 2000: 2000 / (100 + 2000/100).
  CHECK(PotentialEnergyAtDistance(100.0, 2000.0, pp) ==
        doctest::Approx(16.666666666666668).epsilon(1e-9));
  // Contact is exactly the cap, not approximately.
  CHECK(PotentialEnergyAtDistance(0.0, 2000.0, pp) == 100.0);
  CHECK(PotentialEnergyAtDistance(0.0, 1.0, pp) == 100.0);
}

TEST_CASE("every interior point carries exactly the cap energy") {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> coord(-40.0, 40.0);
  std::uniform_real_distribution<double> ang(-4.0, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const PotentialParams pp = UnitGainParams();
  int tested = 0;
  while (tested < 10000) {
    const DynamicObject obj =
        MakeCar("a", Pose2::Make(coord(rng), coord(rng), ang(rng)), 20.0 * unit(rng));
    // Sample the object frame rectangle, then map to world.
    for (int k = 0; k < 20; ++k, ++tested) {
      const Vec2 local{-2.3 + 4.6 * unit(rng), -0.9 + 1.8 * unit(rng)};
      const Vec2 u = UnitVector(obj.pose.heading);
      const Vec2 n = LeftNormal(obj.pose.heading);
      const Vec2 world = obj.pose.position + u * local.x + n * local.y;
      CHECK(PotentialEnergy(obj, world, pp) == pp.e_max);
    }
  }
}

TEST_CASE("potential energy strictly decreases with distance") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> dist(1e-6, 1000.0);
  std::uniform_real_distribution<double> mass(10.0, 100000.0);
  std::uniform_real_distribution<double> k1(1.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    PotentialParams pp = UnitGainParams();
    pp.k1 = k1(rng);
    const double mv = mass(rng);
    double d1 = dist(rng);
    double d2 = dist(rng);
    if (d1 > d2) std::swap(d1, d2);
    if (d2 - d1 < 1e-9) continue;
    const double e1 = PotentialEnergyAtDistance(d1, mv, pp);
    const double e2 = PotentialEnergyAtDistance(d2, mv, pp);
    CHECK(e1 > e2);
    CHECK(e1 <= pp.e_max);
    CHECK(e2 > 0.0);
  }
}

TEST_CASE("potential energy strictly increases with speed") {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> dist(0.5, 150.0);
  std::uniform_real_distribution<double> speed(0.0, 40.0);
  const PotentialParams pp = UnitGainParams();
  for (int i = 0; i < 10000; ++i) {
    double v1 = speed(rng);
    double v2 = speed(rng);
    if (v1 > v2) std::swap(v1, v2);
    if (v2 - v1 < 1e-9) continue;
    const double d = dist(rng);
    const double e1 = PotentialEnergyAtDistance(d, VirtualMass(1500.0, v1, pp), pp);
    const double e2 = PotentialEnergyAtDistance(d, VirtualMass(1500.0, v2, pp), pp);
    CHECK(e2 > e1);
  }
}

TEST_CASE("energy vanishes beyond the cutoff radius") {
  PotentialParams pp = UnitGainParams();
  pp.cutoff = 200.0;
  CHECK(PotentialEnergyAtDistance(200.0, 5000.0, pp) > 0.0);
  CHECK(PotentialEnergyAtDistance(200.0 + 1e-9, 5000.0, pp) == 0.0);
  CHECK(PotentialEnergyAtDistance(1e6, 5000.0, pp) == 0.0);
}

TEST_CASE("weighted distance scalar cases") {
  // Zero lateral offset reduces to the longitudinal distance.
  CHECK(WeightedDistance(10.0, 0.0, 2.0) == 10.0);
  CHECK(WeightedDistance(-7.5, 0.0, 2.0) == 7.5);
  // Half-width lateral offset: 10 / sqrt(1 - 0.25).
  const auto dw = WeightedDistance(10.0, 1.0, 2.0);
  REQUIRE(dw.has_value());
  CHECK(*dw == doctest::Approx(11.547005383792516).epsilon(1e-9));
  // At or beyond the band edge the distance is unbounded.
  CHECK_FALSE(WeightedDistance(10.0, 2.0, 2.0).has_value());
  CHECK_FALSE(WeightedDistance(10.0, -2.0, 2.0).has_value());
  CHECK_FALSE(WeightedDistance(10.0, 5.0, 2.0).has_value());
}

TEST_CASE("weighted distance dominates the longitudinal distance") {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> lon(-50.0, 50.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> width(0.1, 5.0);
  for (int i = 0; i < 10000; ++i) {
    const double w = width(rng);
    const double d_lon = lon(rng);
    const double d_lat = (2.0 * unit(rng) - 1.0) * w * 0.999;
    const auto dw = WeightedDistance(d_lon, d_lat, w);
    REQUIRE(dw.has_value());
    CHECK(*dw >= std::abs(d_lon));
    if (d_lat != 0.0 && d_lon != 0.0) CHECK(*dw > std::abs(d_lon));
  }
}

TEST_CASE("saturation map is increasing, anchored at zero, and capped") {
  const double e_max = 100.0;
  CHECK(SmoothEnergy(0.0, e_max) == 0.0);
  CHECK(SmoothEnergy(1e12, e_max) <= e_max);
  CHECK(SmoothEnergy(1e12, e_max) > e_max - 1e-6);

  std::mt19937_64 rng(106);
  // Beyond raw ~ 10 * e_max the exponential tail is flat to double
  // precision, so strictness is only claimed below it.
  std::uniform_real_distribution<double> raw(0.0, 1000.0);
  for (int i = 0; i < 10000; ++i) {
    double r1 = raw(rng);
    double r2 = raw(rng);
    if (r1 > r2) std::swap(r1, r2);
    const double s1 = SmoothEnergy(r1, e_max);
    const double s2 = SmoothEnergy(r2, e_max);
    if (r2 - r1 > 1e-6) CHECK(s2 > s1);
    CHECK(s1 < e_max);
    // Near the origin the map is close to the identity from below.
    if (r1 < 1.0) {
      CHECK(s1 <= r1);
      CHECK(r1 - s1 <= r1 * r1 / (2.0 * e_max) + 1e-15);
    }
  }
}

TEST_CASE("kinetic energy scalar case") {
  // Object of virtual mass 2000 moving at 10 toward a point 10 m straight
  // ahead, reach 30 m: raw = 100 / (2 * 2000 * 10 * (1 - 1/3)) = 0.00375.
  PotentialParams pp = UnitGainParams();
  KineticParams kp;
  kp.horizon = 3.0;
  kp.v_min = 0.1;
  DynamicObject obj = MakeCar("a", Pose2::Make(0.0, 0.0, 0.0), 10.0);
  obj.mass = 1000.0;
  REQUIRE(VirtualMass(obj.mass, obj.speed, pp) == 2000.0);
  const double got = KineticEnergy(obj, {0.0, 0.0}, {10.0, 0.0}, pp, kp);
  CHECK(got == doctest::Approx(0.003749929688379172).epsilon(1e-9));
}

TEST_CASE("kinetic energy approaches the cap at the reach boundary") {
  PotentialParams pp = UnitGainParams();
  KineticParams kp;
  kp.horizon = 3.0;
  const DynamicObject obj = MakeCar("a", Pose2::Make(0.0, 0.0, 0.0), 10.0);
  // Reach is v_r * t = 30; just inside it the raw value blows up and the
  // saturation map pins the result at the cap.
  const double near = KineticEnergy(obj, {0.0, 0.0}, {30.0 - 1e-7, 0.0}, pp, kp);
  CHECK(near > 99.9);
  CHECK(near <= 100.0);
}

TEST_CASE("kinetic energy zero regions") {
  PotentialParams pp = UnitGainParams();
  KineticParams kp;
  kp.horizon = 3.0;
  kp.v_min = 0.1;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);

  for (int i = 0; i < 10000; ++i) {
    const int gate = i % 5;
    DynamicObject obj = MakeCar("a", Pose2::Make(0.0, 0.0, 0.0), 10.0);
    Vec2 observer{0.0, 0.0};
    Vec2 point{5.0 + 20.0 * unit(rng), (unit(rng) - 0.5) * obj.width};
    switch (gate) {
      case 0:  // receding: observer faster along the object heading
        observer = {obj.speed + 1.0 + 10.0 * unit(rng), 0.0};
        break;
      case 1:  // relative speed at or below the floor
        observer = {obj.speed - kp.v_min * unit(rng), 0.0};
        break;
      case 2:  // point at or behind the object center
        point = {-20.0 * unit(rng), (unit(rng) - 0.5) * obj.width};
        break;
      case 3:  // outside the lateral band
        point = {5.0 + 20.0 * unit(rng),
                 (obj.width + 5.0 * unit(rng)) * (unit(rng) < 0.5 ? 1.0 : -1.0)};
        break;
      case 4:  // at or beyond the reachable distance
        point = {obj.speed * kp.horizon * (1.0 + unit(rng)), 0.0};
        break;
    }
    CHECK(KineticEnergy(obj, observer, point, pp, kp) == 0.0);
  }
}

TEST_CASE("kinetic energy is strictly inside (0, cap) on its support") {
  PotentialParams pp = UnitGainParams();
  KineticParams kp;
  kp.horizon = 3.0;
  kp.v_min = 0.1;
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double speed = 1.0 + 20.0 * unit(rng);
    const DynamicObject obj = MakeCar("a", Pose2::Make(0.0, 0.0, 0.0), speed);
    const double reach = speed * kp.horizon;
    const double d_lat = (unit(rng) - 0.5) * 1.8 * obj.width;
    if (std::abs(d_lat) >= obj.width) continue;
    const double scale = std::sqrt(1.0 - (d_lat / obj.width) * (d_lat / obj.width));
    // Choose the longitudinal offset so the weighted distance stays inside
    // the reach: D_w = d_lon / scale < reach.
    const double d_lon = (0.05 + 0.9 * unit(rng)) * reach * scale;
    if (d_lon <= 0.0) continue;
    const double e = KineticEnergy(obj, {0.0, 0.0}, {d_lon, d_lat}, pp, kp);
    CHECK(e > 0.0);
    CHECK(e < pp.e_max);
  }
}

TEST_CASE("static energy scalar cases") {
  StaticFieldParams sp;
  sp.kappa = 2.0;
  StaticObject line;
  line.id = "edge";
  line.kind = StaticKind::kLaneLine;
  line.shape = Polyline({{-10.0, 0.0}, {10.0, 0.0}});
  line.width = 0.15;
  line.stiffness = 400.0;

  // On the line: k_s * (kappa * D / 2)^2 = 400 * 0.15^2.
  CHECK(StaticEnergy(line, {0.0, 0.0}, sp) == doctest::Approx(9.0).epsilon(1e-12));
  // At or past the influence edge the energy is exactly zero.
  CHECK(StaticEnergy(line, {0.0, 0.15}, sp) == 0.0);
  CHECK(StaticEnergy(line, {0.0, 5.0}, sp) == 0.0);
  // Halving the distance from the edge: k_s * (kappa * D / 4)^2.
  CHECK(StaticEnergy(line, {0.0, 0.075}, sp) ==
        doctest::Approx(400.0 * 0.075 * 0.075).epsilon(1e-12));
}

TEST_CASE("static energy is continuous at the influence boundary") {
  StaticFieldParams sp;
  sp.kappa = 2.0;
  StaticObject wall;
  wall.id = "w";
  wall.kind = StaticKind::kBarrier;
  wall.shape = Polyline({{0.0, -50.0}, {0.0, 50.0}});
  wall.width = 1.0;
  wall.stiffness = 1e5;
  const double reach = sp.kappa * wall.width / 2.0;  // 1.0

  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double eps = 1e-5 + unit(rng) * 0.49;
    const double inside = StaticEnergy(wall, {reach - eps, 0.0}, sp);
    // Quadratic growth from zero at the boundary.
    CHECK(inside == doctest::Approx(wall.stiffness * eps * eps).epsilon(1e-9));
    CHECK(StaticEnergy(wall, {reach + eps, 0.0}, sp) == 0.0);
  }
}

TEST_CASE("combined field: empty scene and single-object reductions") {
  Params params;
  params.potential = UnitGainParams();
  const std::vector<StaticObject> no_statics;
  const std::vector<DynamicObject> no_objects;
  CHECK(TotalEnergyAt({3.0, 4.0}, no_objects, no_statics, {0.0, 0.0}, "", params) == 0.0);

  // A stationary object has no kinetic part: the total equals the potential
  // term alone, bit for bit.
  const DynamicObject parked = MakeCar("p", Pose2::Make(10.0, 2.0, 0.7), 0.0);
  const std::vector<DynamicObject> one = {parked};
  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> coord(-60.0, 60.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec2 p{coord(rng), coord(rng)};
    const double total = TotalEnergyAt(p, one, no_statics, {5.0, 0.0}, "", params);
    CHECK(total == PotentialEnergy(parked, p, params.potential));
  }
}

TEST_CASE("two equidistant twins contribute exactly twice one object") {
  Params params;
  params.potential = UnitGainParams();
  const std::vector<StaticObject> no_statics;
  // Mirror twins about the origin with axis-aligned footprints so both
  // boundary distances come out as the same double; probe at the midpoint.
  const DynamicObject a = MakeCar("a", Pose2::Make(40.0, 0.0, 0.0), 0.0);
  const DynamicObject b = MakeCar("b", Pose2::Make(-40.0, 0.0, 0.0), 0.0);
  const std::vector<DynamicObject> both = {a, b};
  const std::vector<DynamicObject> just_a = {a};
  const Vec2 probe{0.0, 0.0};
  const double single = TotalEnergyAt(probe, just_a, no_statics, {0.0, 0.0}, "", params);
  const double twin = TotalEnergyAt(probe, both, no_statics, {0.0, 0.0}, "", params);
  REQUIRE(single * 2.0 < params.potential.e_max);
  CHECK(twin == 2.0 * single);
}

TEST_CASE("combined field stays within [0, cap] and ignores the excluded id") {
  Params params;
  std::mt19937_64 rng(111);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  std::uniform_real_distribution<double> speed(0.0, 20.0);
  std::uniform_int_distribution<int> count(1, 6);

  for (int round = 0; round < 500; ++round) {
    std::vector<DynamicObject> objects;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      objects.push_back(MakeCar("car" + std::to_string(i),
                                Pose2::Make(coord(rng), coord(rng), ang(rng)), speed(rng)));
    }
    std::vector<StaticObject> statics;
    StaticObject line;
    line.id = "line";
    line.kind = StaticKind::kLaneLine;
    line.shape = Polyline({{-40.0, coord(rng) / 10.0}, {40.0, coord(rng) / 10.0}});
    line.width = 0.15;
    line.stiffness = 400.0;
    statics.push_back(line);

    for (int probe = 0; probe < 20; ++probe) {
      const Vec2 p{coord(rng), coord(rng)};
      const double e = TotalEnergyAt(p, objects, statics, {speed(rng), 0.0}, "", params);
      CHECK(e >= 0.0);
      CHECK(e <= params.potential.e_max);
    }

    // Excluding an id removes exactly that object's contribution.
    const Vec2 p{coord(rng), coord(rng)};
    std::vector<DynamicObject> without(objects.begin() + 1, objects.end());
    const double excl = TotalEnergyAt(p, objects, statics, {0.0, 0.0}, objects[0].id, params);
    const double gone = TotalEnergyAt(p, without, statics, {0.0, 0.0}, "", params);
    CHECK(excl == gone);
  }
}

TEST_CASE("combined field is permutation invariant") {
  Params params;
  std::mt19937_64 rng(112);
  std::uniform_real_distribution<double> coord(-25.0, 25.0);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  std::uniform_real_distribution<double> speed(0.0, 15.0);

  for (int round = 0; round < 300; ++round) {
    std::vector<DynamicObject> objects;
    for (int i = 0; i < 5; ++i) {
      objects.push_back(MakeCar("car" + std::to_string(i),
                                Pose2::Make(coord(rng), coord(rng), ang(rng)), speed(rng)));
    }
    const std::vector<StaticObject> no_statics;
    const Vec2 p{coord(rng), coord(rng)};
    const Vec2 observer{speed(rng), speed(rng) / 3.0};
    const double base = TotalEnergyAt(p, objects, no_statics, observer, "", params);
    std::shuffle(objects.begin(), objects.end(), rng);
    CHECK(TotalEnergyAt(p, objects, no_statics, observer, "", params) == base);
    std::shuffle(objects.begin(), objects.end(), rng);
    CHECK(TotalEnergyAt(p, objects, no_statics, observer, "", params) == base);
  }
}

TEST_CASE("prepared scenes match a direct sum of the public terms") {
  Params params;
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  std::uniform_real_distribution<double> speed(0.0, 15.0);

  for (int round = 0; round < 200; ++round) {
    std::vector<DynamicObject> objects;
    for (int i = 0; i < 4; ++i) {
      objects.push_back(MakeCar("car" + std::to_string(i),
                                Pose2::Make(coord(rng), coord(rng), ang(rng)), speed(rng)));
    }
    std::vector<StaticObject> statics;
    StaticObject line;
    line.id = "line";
    line.kind = StaticKind::kLaneLine;
    line.shape = Polyline({{-40.0, 2.0}, {40.0, 2.0}});
    line.width = 0.15;
    line.stiffness = 400.0;
    statics.push_back(line);
    const Vec2 observer{speed(rng), 0.0};

    for (int probe = 0; probe < 25; ++probe) {
      const Vec2 p{coord(rng), coord(rng)};
      double sum = 0.0;
      for (const DynamicObject& obj : objects) {
        sum += PotentialEnergy(obj, p, params.potential);
        sum += KineticEnergy(obj, observer, p, params.potential, params.kinetic);
      }
      for (const StaticObject& so : statics) sum += StaticEnergy(so, p, params.static_field);
      const double expect = std::min(params.potential.e_max, sum);
      const double got = TotalEnergyAt(p, objects, statics, observer, "", params);
      CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}
