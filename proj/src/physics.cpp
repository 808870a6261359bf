#include "arena/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arena::physics {

namespace {

constexpr Vec3 kUp{0.0, 1.0, 0.0};
constexpr double kContactSlop = 1e-4;
constexpr double kPenetrationEpsilon = 1e-9;
constexpr double kSupportNormalY = 0.2;
constexpr int kMaxSubsteps = 256;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Footprint {
  double min_x = 0.0;
  double max_x = 0.0;
  double min_z = 0.0;
  double max_z = 0.0;
};

std::array<Vec3, 3> box_axes(double yaw, double roll_degrees) {
  const Vec3 ax = right_from_yaw(yaw);
  const Vec3 az = forward_from_yaw(yaw);
  if (roll_degrees == 0.0) return {ax, kUp, az};
  const double r = deg_to_rad(roll_degrees);
  const double c = std::cos(r), s = std::sin(r);
  return {ax * c + kUp * s, kUp * c - ax * s, az};
}

Footprint box_footprint(const Vec3& offset, const Vec3& half, double yaw, double roll = 0.0) {
  const auto axes = box_axes(yaw, roll);
  const Vec3 cx = right_from_yaw(yaw) * offset.x + forward_from_yaw(yaw) * offset.z;
  const double fx = std::abs(axes[0].x) * half.x + std::abs(axes[1].x) * half.y +
                    std::abs(axes[2].x) * half.z;
  const double fz = std::abs(axes[0].z) * half.x + std::abs(axes[1].z) * half.y +
                    std::abs(axes[2].z) * half.z;
  return {cx.x - fx, cx.x + fx, cx.z - fz, cx.z + fz};
}

Footprint footprint(const Collider& collider, double yaw) {
  return std::visit(
      Overloaded{
          [](const Sphere& s) { return Footprint{-s.radius, s.radius, -s.radius, s.radius}; },
          [&](const Box& b) { return box_footprint({}, b.half_extents, yaw); },
          [&](const RampPrism& r) { return box_footprint({}, r.size * 0.5, yaw); },
          [&](const Compound& c) {
            Footprint f{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
                        std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
            for (const auto& part : c.parts) {
              const Footprint p =
                  box_footprint(part.offset, part.half_extents, yaw, part.roll_degrees);
              f.min_x = std::min(f.min_x, p.min_x);
              f.max_x = std::max(f.max_x, p.max_x);
              f.min_z = std::min(f.min_z, p.min_z);
              f.max_z = std::max(f.max_z, p.max_z);
            }
            return f;
          },
      },
      collider.shape);
}

double bottom_offset(const Collider& collider) {
  if (const auto* c = std::get_if<Compound>(&collider.shape)) {
    double lo = std::numeric_limits<double>::max();
    for (const auto& part : c->parts) {
      const auto axes = box_axes(0.0, part.roll_degrees);
      const double reach = std::abs(axes[0].y) * part.half_extents.x +
                           std::abs(axes[1].y) * part.half_extents.y;
      lo = std::min(lo, part.offset.y - reach);
    }
    return lo == 0.0 ? 0.0 : lo;
  }
  return 0.0;
}

double inverse_mass(const Body& b) { return b.immovable ? 0.0 : 1.0 / b.mass; }

}  // namespace

namespace detail {

namespace {

Hull make_box(const Vec3& center, const Vec3& half, double yaw, double roll = 0.0) {
  Hull h;
  h.is_box = true;
  h.center = center;
  h.half = half;
  h.axes = box_axes(yaw, roll);
  const auto& a = h.axes;
  int k = 0;
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2)
      for (int sz = -1; sz <= 1; sz += 2)
        h.verts[k++] = center + a[0] * (sx * half.x) + a[1] * (sy * half.y) + a[2] * (sz * half.z);
  h.vert_count = 8;
  const double hh[3] = {half.x, half.y, half.z};
  for (int i = 0; i < 3; ++i) {
    const double c = dot(a[i], center);
    h.planes[2 * i] = {a[i], c + hh[i]};
    h.planes[2 * i + 1] = {-a[i], -c + hh[i]};
  }
  h.plane_count = 6;
  return h;
}

Hull make_ramp(const Vec3& base, const Vec3& size, double yaw, double max_ratio) {
  Hull h;
  const Vec3 ax = right_from_yaw(yaw);
  const Vec3 az = forward_from_yaw(yaw);
  const double hx = size.x * 0.5;
  const double hz = size.z * 0.5;
  auto local = [&](double x, double y, double z) { return base + ax * x + kUp * y + az * z; };
  h.verts[0] = local(-hx, 0.0, -hz);
  h.verts[1] = local(hx, 0.0, -hz);
  h.verts[2] = local(-hx, 0.0, hz);
  h.verts[3] = local(hx, 0.0, hz);
  h.verts[4] = local(-hx, size.y, -hz);
  h.verts[5] = local(hx, size.y, -hz);
  h.vert_count = 6;
  const double bx = dot(ax, base);
  const double bz = dot(az, base);
  h.planes[0] = {-kUp, -base.y};
  h.planes[1] = {ax, bx + hx};
  h.planes[2] = {-ax, -bx + hx};
  h.planes[3] = {-az, -bz + hz};
  const double len = std::sqrt(size.z * size.z + size.y * size.y);
  const Vec3 slope = (kUp * size.z + az * size.y) / len;
  h.planes[4] = {slope, dot(slope, local(0.0, 0.0, hz))};
  h.plane_count = 5;
  h.center = local(0.0, size.y / 3.0, -hz / 3.0);
  if (size.y / size.z > max_ratio) {
    h.steep_plane = 4;
    h.steep_push = az;
  }
  return h;
}

}  // namespace

void build_parts(const Body& body, const Collider& collider, const PhysicsParams& params,
                 std::vector<Part>& out) {
  out.clear();
  const Vec3& p = body.pose.position;
  const double yaw = body.pose.yaw;
  std::visit(Overloaded{
                 [&](const Sphere& s) { out.emplace_back(Ball{p + kUp * s.radius, s.radius}); },
                 [&](const Box& b) {
                   out.emplace_back(make_box(p + kUp * b.half_extents.y, b.half_extents, yaw));
                 },
                 [&](const RampPrism& r) {
                   out.emplace_back(make_ramp(p, r.size, yaw, params.max_ramp_ratio));
                 },
                 [&](const Compound& c) {
                   const Vec3 ax = right_from_yaw(yaw);
                   const Vec3 az = forward_from_yaw(yaw);
                   for (const auto& part : c.parts) {
                     const Vec3 centre =
                         p + ax * part.offset.x + kUp * part.offset.y + az * part.offset.z;
                     out.emplace_back(make_box(centre, part.half_extents, yaw, part.roll_degrees));
                   }
                 },
             },
             collider.shape);
}

}  // namespace detail

namespace {

using detail::Ball;
using detail::Hull;
using detail::Part;

Separation ball_ball(const Ball& a, const Ball& b) {
  const Vec3 d = a.center - b.center;
  const double len = length(d);
  const Vec3 n = len > 1e-12 ? d / len : kUp;
  return {len - a.radius - b.radius, n};
}

// Normal points from the hull toward the ball.
Separation ball_hull(const Ball& a, const Hull& h) {
  if (h.is_box) {
    const Vec3 rel = a.center - h.center;
    const auto& axes = h.axes;
    const double l[3] = {dot(rel, axes[0]), dot(rel, axes[1]), dot(rel, axes[2])};
    const double hh[3] = {h.half.x, h.half.y, h.half.z};
    double c[3];
    bool inside = true;
    for (int i = 0; i < 3; ++i) {
      c[i] = std::clamp(l[i], -hh[i], hh[i]);
      if (c[i] != l[i]) inside = false;
    }
    if (!inside) {
      const Vec3 d = axes[0] * (l[0] - c[0]) + axes[1] * (l[1] - c[1]) + axes[2] * (l[2] - c[2]);
      const double len = length(d);
      return {len - a.radius, d / len};
    }
    int best = 0;
    double best_pen = std::numeric_limits<double>::max();
    for (int i = 0; i < 3; ++i) {
      const double pen = hh[i] - std::abs(l[i]);
      if (pen < best_pen) {
        best_pen = pen;
        best = i;
      }
    }
    const Vec3 n = axes[best] * (l[best] < 0.0 ? -1.0 : 1.0);
    return {-best_pen - a.radius, n};
  }
  double best = std::numeric_limits<double>::lowest();
  int bi = 0;
  for (int k = 0; k < h.plane_count; ++k) {
    const double s = dot(h.planes[k].normal, a.center) - h.planes[k].offset;
    if (s > best) {
      best = s;
      bi = k;
    }
  }
  double dist = best - a.radius;
  Vec3 n = h.planes[bi].normal;
  if (bi == h.steep_plane) {
    if (dist < 0.0) dist /= dot(n, h.steep_push);
    n = h.steep_push;
  }
  return {dist, n};
}

// Separating-axis test over face normals. Normal points from b toward a.
Separation hull_hull(const Hull& a, const Hull& b) {
  double min_overlap = std::numeric_limits<double>::max();
  Vec3 min_normal = kUp;
  double max_gap = std::numeric_limits<double>::lowest();
  Vec3 gap_normal = kUp;
  bool separated = false;
  auto test_axis = [&](const Vec3& n) {
    double amin = std::numeric_limits<double>::max(), amax = std::numeric_limits<double>::lowest();
    double bmin = amin, bmax = amax;
    for (int i = 0; i < a.vert_count; ++i) {
      const double p = dot(n, a.verts[i]);
      amin = std::min(amin, p);
      amax = std::max(amax, p);
    }
    for (int i = 0; i < b.vert_count; ++i) {
      const double p = dot(n, b.verts[i]);
      bmin = std::min(bmin, p);
      bmax = std::max(bmax, p);
    }
    const double push_pos = bmax - amin;  // move a along +n
    const double push_neg = amax - bmin;  // move a along -n
    if (push_pos < 0.0 || push_neg < 0.0) {
      separated = true;
      const double gap = std::max(-push_pos, -push_neg);
      if (gap > max_gap) {
        max_gap = gap;
        gap_normal = push_pos < 0.0 ? -n : n;
      }
      return;
    }
    if (push_pos < min_overlap) {
      min_overlap = push_pos;
      min_normal = n;
    }
    if (push_neg < min_overlap) {
      min_overlap = push_neg;
      min_normal = -n;
    }
  };
  for (int k = 0; k < a.plane_count; ++k) test_axis(a.planes[k].normal);
  for (int k = 0; k < b.plane_count; ++k) test_axis(b.planes[k].normal);
  if (separated) return {max_gap, gap_normal};
  return {-min_overlap, min_normal};
}

Separation part_separation(const Part& a, const Part& b) {
  if (const auto* ba = std::get_if<Ball>(&a)) {
    if (const auto* bb = std::get_if<Ball>(&b)) return ball_ball(*ba, *bb);
    return ball_hull(*ba, std::get<Hull>(b));
  }
  const Hull& ha = std::get<Hull>(a);
  if (const auto* bb = std::get_if<Ball>(&b)) {
    Separation s = ball_hull(*bb, ha);
    s.normal = -s.normal;
    return s;
  }
  return hull_hull(ha, std::get<Hull>(b));
}

Separation parts_separation(const std::vector<Part>& a, const std::vector<Part>& b) {
  Separation best{std::numeric_limits<double>::max(), kUp};
  for (const auto& pa : a)
    for (const auto& pb : b) {
      const Separation s = part_separation(pa, pb);
      if (s.distance < best.distance) best = s;
    }
  return best;
}

struct Bound {
  Vec3 center;
  double radius = 0.0;
};

Bound bound_of(const Body& body, const Collider& collider) {
  const Footprint f = footprint(collider, body.pose.yaw);
  const double h = collider_height(collider);
  const double lo = bottom_offset(collider);
  const Vec3 c{body.pose.position.x + 0.5 * (f.min_x + f.max_x), body.pose.position.y + 0.5 * (lo + h),
               body.pose.position.z + 0.5 * (f.min_z + f.max_z)};
  const Vec3 half{0.5 * (f.max_x - f.min_x), 0.5 * (h - lo), 0.5 * (f.max_z - f.min_z)};
  return {c, length(half)};
}

enum class Boundary { None, Floor, FenceMinX, FenceMaxX, FenceMinZ, FenceMaxZ };

Separation boundary_separation(const Body& body, const Collider& collider, Boundary which,
                               double arena) {
  const Vec3& p = body.pose.position;
  if (which == Boundary::Floor) return {p.y + bottom_offset(collider), kUp};
  const Footprint f = footprint(collider, body.pose.yaw);
  switch (which) {
    case Boundary::FenceMinX:
      return {p.x + f.min_x, {1.0, 0.0, 0.0}};
    case Boundary::FenceMaxX:
      return {arena - (p.x + f.max_x), {-1.0, 0.0, 0.0}};
    case Boundary::FenceMinZ:
      return {p.z + f.min_z, {0.0, 0.0, 1.0}};
    case Boundary::FenceMaxZ:
      return {arena - (p.z + f.max_z), {0.0, 0.0, -1.0}};
    default:
      return {std::numeric_limits<double>::max(), kUp};
  }
}

void check_finite(const RigidBody& rb) {
  if (!is_finite(rb.body.pose.position) || !is_finite(rb.body.velocity) ||
      !std::isfinite(rb.body.pose.yaw))
    throw SimulationFault("non-finite state on entity " + std::to_string(rb.id));
}

}  // namespace

Vec3 footprint_half_extents(const Collider& collider, double yaw) {
  const Footprint f = footprint(collider, yaw);
  return {std::max(-f.min_x, f.max_x), 0.0, std::max(-f.min_z, f.max_z)};
}

double collider_height(const Collider& collider) {
  return std::visit(Overloaded{
                        [](const Sphere& s) { return 2.0 * s.radius; },
                        [](const Box& b) { return 2.0 * b.half_extents.y; },
                        [](const RampPrism& r) { return r.size.y; },
                        [](const Compound& c) {
                          double hi = 0.0;
                          for (const auto& part : c.parts) {
                            const auto axes = box_axes(0.0, part.roll_degrees);
                            const double reach = std::abs(axes[0].y) * part.half_extents.x +
                                                 std::abs(axes[1].y) * part.half_extents.y;
                            hi = std::max(hi, part.offset.y + reach);
                          }
                          return hi;
                        },
                    },
                    collider.shape);
}

void integrate_step(std::span<RigidBody> bodies, std::span<const Vec3> applied_impulses,
                    const PhysicsParams& params) {
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    Body& b = bodies[i].body;
    check_finite(bodies[i]);
    if (b.immovable) {
      b.velocity = {};
      continue;
    }
    if (b.grounded) {
      b.velocity = b.velocity * params.drag;
    } else {
      b.velocity.x *= params.drag;
      b.velocity.z *= params.drag;
    }
    if (i < applied_impulses.size()) b.velocity += applied_impulses[i];
    if (!b.grounded) b.velocity.y -= params.gravity;
    if (b.grounded && b.friction) {
      const double speed = horizontal_length(b.velocity);
      if (speed <= params.friction) {
        b.velocity.x = 0.0;
        b.velocity.z = 0.0;
      } else {
        const double k = (speed - params.friction) / speed;
        b.velocity.x *= k;
        b.velocity.z *= k;
      }
    }
  }
}

std::vector<Contact> resolve_collisions(std::span<RigidBody> bodies, const PhysicsParams& params) {
  const std::size_t n = bodies.size();
  double max_speed = 0.0;
  for (const auto& rb : bodies) {
    check_finite(rb);
    if (!rb.body.immovable) max_speed = std::max(max_speed, length(rb.body.velocity));
  }
  const int substeps = std::clamp(
      static_cast<int>(std::ceil(max_speed / params.max_substep_travel)), params.min_substeps,
      kMaxSubsteps);

  std::vector<std::vector<Part>> parts(n);
  std::vector<Bound> bounds(n);
  auto rebuild = [&](std::size_t i) {
    detail::build_parts(bodies[i].body, bodies[i].collider, params, parts[i]);
    bounds[i] = bound_of(bodies[i].body, bodies[i].collider);
  };
  for (std::size_t i = 0; i < n; ++i) rebuild(i);

  std::vector<Contact> events;
  std::vector<char> grounded(n, 0);

  auto record = [&](EntityId a, EntityId b, const Vec3& normal, double depth, bool solid) {
    for (auto& e : events) {
      if (e.a == a && e.b == b) {
        if (depth > e.depth) {
          e.depth = depth;
          e.normal = normal;
        }
        return;
      }
    }
    events.push_back({a, b, normal, depth, solid});
  };

  struct Pending {
    double distance;
    std::size_t i;
    std::size_t j;  // == n for arena boundary
    Boundary boundary;
  };
  std::vector<Pending> pending;
  const double inv_sub = 1.0 / substeps;

  for (int s = 0; s < substeps; ++s) {
    std::fill(grounded.begin(), grounded.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      Body& b = bodies[i].body;
      if (b.immovable) continue;
      b.pose.position += b.velocity * inv_sub;
      rebuild(i);
    }

    pending.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const RigidBody& ri = bodies[i];
      if (!ri.collider.is_solid) continue;
      if (!ri.body.immovable) {
        for (Boundary w : {Boundary::Floor, Boundary::FenceMinX, Boundary::FenceMaxX,
                           Boundary::FenceMinZ, Boundary::FenceMaxZ}) {
          const Separation sep = boundary_separation(ri.body, ri.collider, w, params.arena_size);
          if (sep.distance < kContactSlop) pending.push_back({sep.distance, i, n, w});
        }
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        const RigidBody& rj = bodies[j];
        if (!rj.collider.is_solid) continue;
        if (ri.body.immovable && rj.body.immovable) continue;
        const double reach = bounds[i].radius + bounds[j].radius + kContactSlop;
        const Vec3 dc = bounds[i].center - bounds[j].center;
        if (dot(dc, dc) > reach * reach) continue;
        const Separation sep = parts_separation(parts[i], parts[j]);
        if (sep.distance < kContactSlop) pending.push_back({sep.distance, i, j, Boundary::None});
      }
    }
    std::sort(pending.begin(), pending.end(), [&](const Pending& x, const Pending& y) {
      if (x.distance != y.distance) return x.distance < y.distance;
      if (bodies[x.i].id != bodies[y.i].id) return bodies[x.i].id < bodies[y.i].id;
      const EntityId xj = x.j == n ? -10 - static_cast<int>(x.boundary) : bodies[x.j].id;
      const EntityId yj = y.j == n ? -10 - static_cast<int>(y.boundary) : bodies[y.j].id;
      return xj < yj;
    });

    for (const Pending& pc : pending) {
      // Orient so that `dyn` is a movable body and `other` is what it touched.
      std::size_t dyn = pc.i;
      std::size_t other = pc.j;
      Separation sep;
      if (other == n) {
        sep = boundary_separation(bodies[dyn].body, bodies[dyn].collider, pc.boundary,
                                  params.arena_size);
      } else {
        if (bodies[dyn].body.immovable) std::swap(dyn, other);
        sep = parts_separation(parts[dyn], parts[other]);
      }
      if (sep.distance >= kContactSlop) continue;

      Body& a = bodies[dyn].body;
      Body* b = other == n ? nullptr : &bodies[other].body;
      const double wa = inverse_mass(a);
      const double wb = b ? inverse_mass(*b) : 0.0;
      const double wsum = wa + wb;
      if (wsum <= 0.0) continue;

      const Vec3 nrm = sep.normal;
      const Vec3 rel_v = b ? a.velocity - b->velocity : a.velocity;
      const double vr = dot(rel_v, nrm);

      if (nrm.y > kSupportNormalY) grounded[dyn] = 1;
      if (b && other != n && -nrm.y > kSupportNormalY) grounded[other] = 1;

      const bool penetrating = sep.distance < -kPenetrationEpsilon;
      if (penetrating || vr < 0.0) {
        const EntityId other_id = other == n
                                      ? (pc.boundary == Boundary::Floor ? kFloorId : kFenceId)
                                      : bodies[other].id;
        record(bodies[dyn].id, other_id, nrm, -sep.distance, true);
        if (b) record(bodies[other].id, bodies[dyn].id, -nrm, -sep.distance, true);
      }

      if (sep.distance < 0.0) {
        const double corr = -sep.distance;
        a.pose.position += nrm * (corr * wa / wsum);
        if (b && wb > 0.0) b->pose.position -= nrm * (corr * wb / wsum);
        rebuild(dyn);
        if (b) rebuild(other);
      }
      if (vr < 0.0) {
        const double j = -vr / wsum;
        a.velocity += nrm * (j * wa);
        if (b && wb > 0.0) b->velocity -= nrm * (j * wb);
      }
    }
  }

  // Overlaps with non-solid volumes are reported but never resolved.
  for (std::size_t i = 0; i < n; ++i) {
    if (bodies[i].body.immovable || !bodies[i].collider.is_solid) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (bodies[j].collider.is_solid) continue;
      const double reach = bounds[i].radius + bounds[j].radius;
      const Vec3 dc = bounds[i].center - bounds[j].center;
      if (dot(dc, dc) > reach * reach) continue;
      const Separation sep = parts_separation(parts[i], parts[j]);
      if (sep.distance < -kPenetrationEpsilon)
        record(bodies[i].id, bodies[j].id, sep.normal, -sep.distance, false);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!bodies[i].body.immovable) bodies[i].body.grounded = grounded[i] != 0;
    check_finite(bodies[i]);
  }
  std::sort(events.begin(), events.end(), [](const Contact& x, const Contact& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return events;
}

std::vector<Contact> step(std::span<RigidBody> bodies, std::span<const Vec3> applied_impulses,
                          const PhysicsParams& params) {
  integrate_step(bodies, applied_impulses, params);
  return resolve_collisions(bodies, params);
}

Separation separation(const Body& a, const Collider& ca, const Body& b, const Collider& cb,
                      const PhysicsParams& params) {
  std::vector<Part> pa, pb;
  detail::build_parts(a, ca, params, pa);
  detail::build_parts(b, cb, params, pb);
  return parts_separation(pa, pb);
}

bool overlaps_any_solid(std::span<const RigidBody> bodies, const Body& probe,
                        const Collider& collider, EntityId exclude, const PhysicsParams& params,
                        double tolerance) {
  for (Boundary w : {Boundary::Floor, Boundary::FenceMinX, Boundary::FenceMaxX,
                     Boundary::FenceMinZ, Boundary::FenceMaxZ}) {
    if (boundary_separation(probe, collider, w, params.arena_size).distance < -tolerance)
      return true;
  }
  std::vector<Part> pp, po;
  detail::build_parts(probe, collider, params, pp);
  const Bound pbound = bound_of(probe, collider);
  for (const auto& rb : bodies) {
    if (rb.id == exclude || !rb.collider.is_solid) continue;
    const Bound ob = bound_of(rb.body, rb.collider);
    const double reach = pbound.radius + ob.radius;
    const Vec3 dc = pbound.center - ob.center;
    if (dot(dc, dc) > reach * reach) continue;
    detail::build_parts(rb.body, rb.collider, params, po);
    if (parts_separation(pp, po).distance < -tolerance) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Ray queries

namespace {

bool ray_ball(const Ball& b, const Vec3& o, const Vec3& d, double& t, Vec3& normal) {
  const Vec3 oc = o - b.center;
  const double half_b = dot(oc, d);
  const double c = dot(oc, oc) - b.radius * b.radius;
  if (c < 0.0) return false;  // origin inside
  const double disc = half_b * half_b - c;
  if (disc < 0.0) return false;
  const double root = -half_b - std::sqrt(disc);
  if (root < 0.0) return false;
  t = root;
  normal = (o + d * root - b.center) / b.radius;
  return true;
}

bool ray_hull(const Hull& h, const Vec3& o, const Vec3& d, double& t, Vec3& normal) {
  double t_in = std::numeric_limits<double>::lowest();
  double t_out = std::numeric_limits<double>::max();
  int in_plane = -1;
  for (int k = 0; k < h.plane_count; ++k) {
    const double denom = dot(h.planes[k].normal, d);
    const double dist = h.planes[k].offset - dot(h.planes[k].normal, o);
    if (std::abs(denom) < 1e-15) {
      if (dist < 0.0) return false;
      continue;
    }
    const double tp = dist / denom;
    if (denom < 0.0) {
      if (tp > t_in) {
        t_in = tp;
        in_plane = k;
      }
    } else {
      t_out = std::min(t_out, tp);
    }
    if (t_in > t_out) return false;
  }
  if (in_plane < 0 || t_in < 0.0) return false;
  t = t_in;
  normal = h.planes[in_plane].normal;
  return true;
}

bool ray_fence(double arena, const Vec3& o, const Vec3& d, double& t, Vec3& normal) {
  double best = std::numeric_limits<double>::max();
  if (d.x > 0.0) {
    const double tx = (arena - o.x) / d.x;
    if (tx < best) best = tx, normal = {-1.0, 0.0, 0.0};
  } else if (d.x < 0.0) {
    const double tx = -o.x / d.x;
    if (tx < best) best = tx, normal = {1.0, 0.0, 0.0};
  }
  if (d.z > 0.0) {
    const double tz = (arena - o.z) / d.z;
    if (tz < best) best = tz, normal = {0.0, 0.0, -1.0};
  } else if (d.z < 0.0) {
    const double tz = -o.z / d.z;
    if (tz < best) best = tz, normal = {0.0, 0.0, 1.0};
  }
  if (best == std::numeric_limits<double>::max() || best < 0.0) return false;
  t = best;
  return true;
}

bool part_contains(const Part& part, const Vec3& o) {
  if (const auto* b = std::get_if<Ball>(&part)) {
    const Vec3 oc = o - b->center;
    return dot(oc, oc) < b->radius * b->radius;
  }
  const Hull& h = std::get<Hull>(part);
  for (int k = 0; k < h.plane_count; ++k)
    if (h.planes[k].offset - dot(h.planes[k].normal, o) <= 0.0) return false;
  return true;
}

// A body enclosing the origin is transparent to the ray as a whole, compound
// bodies included.
bool item_contains(const std::vector<Part>& parts, const Vec3& o) {
  for (const auto& p : parts)
    if (part_contains(p, o)) return true;
  return false;
}

bool ray_misses_bound(const Vec3& c, double r, const Vec3& o, const Vec3& d, double max_range) {
  const Vec3 oc = c - o;
  const double along = dot(oc, d);
  if (along < -r || along > max_range + r) return true;
  const double perp2 = dot(oc, oc) - along * along;
  return perp2 > r * r;
}

}  // namespace

RayScene::RayScene(std::span<const RayTarget> targets, std::optional<double> arena_size,
                   const PhysicsParams& params)
    : arena_size_(arena_size) {
  items_.reserve(targets.size());
  for (const auto& t : targets) {
    Item item;
    item.id = t.id;
    item.category = t.category;
    detail::build_parts(*t.body, *t.collider, params, item.parts);
    const Bound b = bound_of(*t.body, *t.collider);
    item.bound_center = b.center;
    item.bound_radius = b.radius + 1e-9;
    items_.push_back(std::move(item));
  }
}

std::optional<RayHit> RayScene::nearest(const Vec3& origin, const Vec3& direction,
                                        double max_range, std::optional<EntityId> exclude) const {
  std::optional<RayHit> best;
  double best_t = max_range;
  for (const auto& item : items_) {
    if (exclude && item.id == *exclude) continue;
    if (ray_misses_bound(item.bound_center, item.bound_radius, origin, direction, best_t)) continue;
    if (item_contains(item.parts, origin)) continue;
    for (const auto& part : item.parts) {
      double t = 0.0;
      Vec3 nrm;
      const bool hit = std::holds_alternative<Ball>(part)
                           ? ray_ball(std::get<Ball>(part), origin, direction, t, nrm)
                           : ray_hull(std::get<Hull>(part), origin, direction, t, nrm);
      if (hit && t <= best_t && (!best || t < best->distance)) {
        best_t = t;
        best = RayHit{t, item.id, item.category, nrm};
      }
    }
  }
  if (arena_size_) {
    double t = 0.0;
    Vec3 nrm;
    if (ray_fence(*arena_size_, origin, direction, t, nrm) && t <= best_t &&
        (!best || t < best->distance))
      best = RayHit{t, kFenceId, 0, nrm};
  }
  return best;
}

void RayScene::all_hits(const Vec3& origin, const Vec3& direction, double max_range,
                        std::vector<RayHit>& out, std::optional<EntityId> exclude) const {
  out.clear();
  for (const auto& item : items_) {
    if (exclude && item.id == *exclude) continue;
    if (ray_misses_bound(item.bound_center, item.bound_radius, origin, direction, max_range))
      continue;
    if (item_contains(item.parts, origin)) continue;
    for (const auto& part : item.parts) {
      double t = 0.0;
      Vec3 nrm;
      const bool hit = std::holds_alternative<Ball>(part)
                           ? ray_ball(std::get<Ball>(part), origin, direction, t, nrm)
                           : ray_hull(std::get<Hull>(part), origin, direction, t, nrm);
      if (hit && t <= max_range) out.push_back({t, item.id, item.category, nrm});
    }
  }
  if (arena_size_) {
    double t = 0.0;
    Vec3 nrm;
    if (ray_fence(*arena_size_, origin, direction, t, nrm) && t <= max_range)
      out.push_back({t, kFenceId, 0, nrm});
  }
}

std::optional<RayHit> raycast(std::span<const RayTarget> targets, const Vec3& origin,
                              const Vec3& direction, double max_range,
                              std::optional<double> arena_size, std::optional<EntityId> exclude) {
  return RayScene(targets, arena_size).nearest(origin, direction, max_range, exclude);
}

}  // namespace arena::physics
