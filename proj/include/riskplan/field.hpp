#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "riskplan/params.hpp"
#include "riskplan/scenario.hpp"

namespace riskplan {

// M_v = m * T * (alpha * v^beta + gamma)
double VirtualMass(double mass, double speed, const PotentialParams& pp);

// Distance-decay energy: k * r_a * M_v / (D^k1 + k * r_a * M_v / E_max).
// Exactly E_max at D = 0, strictly decreasing in D, and in (0, E_max].
double PotentialEnergyAtDistance(double distance, double virtual_mass, const PotentialParams& pp);
double PotentialEnergy(const DynamicObject& obj, const Vec2& point, const PotentialParams& pp);

// Elliptic weighting of the longitudinal distance by the lateral offset:
// sqrt(D_lon^2 / (1 - (D_lat / width)^2)). nullopt means the point lies
// outside the object's lateral band (|D_lat| >= width), where the motion
// field does not apply.
std::optional<double> WeightedDistance(double d_lon, double d_lat, double width);

// Caps the raw motion energy smoothly at e_max; strictly increasing, 0 at 0.
double SmoothEnergy(double raw, double e_max);

// Forward-wedge motion energy of `obj` as seen by an observer moving with
// `observer_velocity`. Zero when the object recedes, behind the object,
// outside the lateral band, or beyond the reachable distance v_r * t.
double KineticEnergy(const DynamicObject& obj, const Vec2& observer_velocity, const Vec2& point,
                     const PotentialParams& pp, const KineticParams& kp);

// E_s = k_s * (kappa * D / 2 - min(kappa * D / 2, dis))^2
double StaticEnergy(const StaticObject& obj, const Vec2& point, const StaticFieldParams& sp);

// Per-frame scene with per-object quantities hoisted out of the cell loop.
// Evaluation order is value-sorted, so results do not depend on the order
// objects are listed in.
class PreparedScene {
 public:
  PreparedScene(std::span<const DynamicObject> objects, std::span<const StaticObject> statics,
                const Vec2& observer_velocity, std::string_view exclude_id, const Params& params);

  double EnergyAt(const Vec2& point) const;

 private:
  struct PreparedObject {
    const DynamicObject* obj;
    ConvexPolygon footprint;  // world frame
    Vec2 aabb_lo, aabb_hi;
    double virtual_mass;
    double v_r;  // relative speed projected on the object heading, floored at 0
    double skip_radius;
    Vec2 heading_unit;
    Vec2 left_normal;
  };
  struct PreparedStatic {
    const StaticObject* obj;
    Vec2 aabb_lo, aabb_hi;
    double reach;  // kappa * width / 2
  };
  std::vector<PreparedObject> objects_;
  std::vector<PreparedStatic> statics_;
  const Params* params_;
};

// Combined field at a point: min(E_max, sum of per-object potential + kinetic
// energies plus static-object energies), excluding `exclude_id` if non-empty.
double TotalEnergyAt(const Vec2& point, std::span<const DynamicObject> objects,
                     std::span<const StaticObject> statics, const Vec2& observer_velocity,
                     std::string_view exclude_id, const Params& params);

}  // namespace riskplan
