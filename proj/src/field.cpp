#include "riskplan/field.hpp"

#include <algorithm>
#include <cmath>

namespace riskplan {

namespace {

double PowK1(double d, double k1) {
  if (k1 == 1.0) return d;
  if (k1 == 2.0) return d * d;
  return std::pow(d, k1);
}

double AabbDistance(const Vec2& p, const Vec2& lo, const Vec2& hi) {
  const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
  const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
  return std::hypot(dx, dy);
}

}  // namespace

double VirtualMass(double mass, double speed, const PotentialParams& pp) {
  return mass * pp.t_scale * (pp.alpha * std::pow(speed, pp.beta) + pp.gamma);
}

double PotentialEnergyAtDistance(double distance, double virtual_mass, const PotentialParams& pp) {
  if (distance <= 0.0) return pp.e_max;
  if (distance > pp.cutoff) return 0.0;
  const double krm = pp.k * pp.r_a * virtual_mass;
  return krm / (PowK1(distance, pp.k1) + krm / pp.e_max);
}

double PotentialEnergy(const DynamicObject& obj, const Vec2& point, const PotentialParams& pp) {
  return PotentialEnergyAtDistance(obj.DistanceTo(point), VirtualMass(obj.mass, obj.speed, pp), pp);
}

std::optional<double> WeightedDistance(double d_lon, double d_lat, double width) {
  const double ratio = d_lat / width;
  if (std::abs(ratio) >= 1.0) return std::nullopt;
  return std::sqrt(d_lon * d_lon / (1.0 - ratio * ratio));
}

double SmoothEnergy(double raw, double e_max) {
  return e_max * (1.0 - std::exp(-raw / e_max));
}

namespace {

// Shared by the public op and the prepared fast path so both produce
// bit-identical values.
double KineticCore(double v_r, double d_lon, double d_lat, double width, double virtual_mass,
                   const PotentialParams& pp, const KineticParams& kp) {
  if (v_r <= kp.v_min) return 0.0;
  if (d_lon <= 0.0) return 0.0;
  const auto dw = WeightedDistance(d_lon, d_lat, width);
  if (!dw) return 0.0;
  const double reach = v_r * kp.horizon;
  if (*dw >= reach) return 0.0;
  const double raw = v_r * v_r / (2.0 * virtual_mass * *dw * (1.0 - *dw / reach));
  return SmoothEnergy(raw, pp.e_max);
}

}  // namespace

double KineticEnergy(const DynamicObject& obj, const Vec2& observer_velocity, const Vec2& point,
                     const PotentialParams& pp, const KineticParams& kp) {
  const Vec2 rel = obj.Velocity() - observer_velocity;
  const double v_r = std::max(0.0, rel.Dot(UnitVector(obj.pose.heading)));
  const FrenetOffsets f = FrenetOffsetsOf(point, obj.pose);
  return KineticCore(v_r, f.lon, f.lat, obj.width, VirtualMass(obj.mass, obj.speed, pp), pp, kp);
}

double StaticEnergy(const StaticObject& obj, const Vec2& point, const StaticFieldParams& sp) {
  const double reach = sp.kappa * obj.width / 2.0;
  const double dis = obj.shape.Distance(point);
  const double depth = reach - std::min(reach, dis);
  return obj.stiffness * depth * depth;
}

PreparedScene::PreparedScene(std::span<const DynamicObject> objects,
                             std::span<const StaticObject> statics, const Vec2& observer_velocity,
                             std::string_view exclude_id, const Params& params)
    : params_(&params) {
  objects_.reserve(objects.size());
  for (const DynamicObject& obj : objects) {
    if (!exclude_id.empty() && obj.id == exclude_id) continue;
    PreparedObject po;
    po.obj = &obj;
    po.footprint = obj.WorldFootprint();
    po.footprint.AxisAlignedBounds(&po.aabb_lo, &po.aabb_hi);
    po.virtual_mass = VirtualMass(obj.mass, obj.speed, params.potential);
    po.heading_unit = UnitVector(obj.pose.heading);
    po.left_normal = LeftNormal(obj.pose.heading);
    po.v_r = std::max(0.0, (obj.Velocity() - observer_velocity).Dot(po.heading_unit));
    // Beyond this radius both energy terms are exactly zero: the potential by
    // its cutoff, the motion term by its lateral band and reachable distance.
    po.skip_radius = std::max(params.potential.cutoff,
                              M_SQRT2 * std::max(obj.width, po.v_r * params.kinetic.horizon));
    objects_.push_back(std::move(po));
  }
  statics_.reserve(statics.size());
  for (const StaticObject& so : statics) {
    PreparedStatic ps;
    ps.obj = &so;
    so.shape.AxisAlignedBounds(&ps.aabb_lo, &ps.aabb_hi);
    ps.reach = params.static_field.kappa * so.width / 2.0;
    statics_.push_back(ps);
  }
}

double PreparedScene::EnergyAt(const Vec2& point) const {
  const PotentialParams& pp = params_->potential;
  const KineticParams& kp = params_->kinetic;

  double terms_buf[16];
  std::vector<double> terms_overflow;
  size_t n_terms = 0;
  const auto push_term = [&](double e) {
    if (e == 0.0) return;
    if (n_terms < 16) {
      terms_buf[n_terms++] = e;
    } else {
      terms_overflow.push_back(e);
    }
  };

  for (const PreparedObject& po : objects_) {
    if (AabbDistance(point, po.aabb_lo, po.aabb_hi) > po.skip_radius) continue;
    const double d = po.footprint.Distance(point);
    double e = PotentialEnergyAtDistance(d, po.virtual_mass, pp);
    if (po.v_r > kp.v_min) {
      const Vec2 rel = point - po.obj->pose.position;
      e += KineticCore(po.v_r, rel.Dot(po.heading_unit), rel.Dot(po.left_normal), po.obj->width,
                       po.virtual_mass, pp, kp);
    }
    push_term(e);
  }
  for (const PreparedStatic& ps : statics_) {
    if (AabbDistance(point, ps.aabb_lo, ps.aabb_hi) > ps.reach) continue;
    push_term(StaticEnergy(*ps.obj, point, params_->static_field));
  }

  // Value-ordered accumulation keeps the sum independent of object order.
  double total = 0.0;
  if (terms_overflow.empty()) {
    std::sort(terms_buf, terms_buf + n_terms);
    for (size_t i = 0; i < n_terms; ++i) total += terms_buf[i];
  } else {
    terms_overflow.insert(terms_overflow.end(), terms_buf, terms_buf + n_terms);
    std::sort(terms_overflow.begin(), terms_overflow.end());
    for (double e : terms_overflow) total += e;
  }
  return std::min(pp.e_max, total);
}

double TotalEnergyAt(const Vec2& point, std::span<const DynamicObject> objects,
                     std::span<const StaticObject> statics, const Vec2& observer_velocity,
                     std::string_view exclude_id, const Params& params) {
  return PreparedScene(objects, statics, observer_velocity, exclude_id, params).EnergyAt(point);
}

}  // namespace riskplan
